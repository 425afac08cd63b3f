"""Seeded random instances for fuzzing and the acceptance suite.

Every generator takes a ``numpy.random.Generator`` and returns plain model
objects, so a seed fully determines a run.  Weight supports stay inside
``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import RadialProfile
from .relaxation import PowerBlowup, power_blowup
from .variational_solver import PolarCompetitor
from .weight_model import Constant, PowerBump, ProblemParams, RadialWeightSpec

__all__ = [
    "BlowupCase",
    "random_blowup",
    "random_bump",
    "random_polar_competitor",
    "random_profile",
    "random_weight",
]


def random_bump(rng: np.random.Generator, params: ProblemParams, lo: float, hi: float, alpha_p=None) -> PowerBump:
    """Power bump on ``[lo, hi]``; ``alpha_p`` defaults to a draw in ``(0.1, 3)``.

    Most draws are compensated; at the origin compensation is dropped when it
    would make the weight non-integrable.
    """
    if alpha_p is None:
        alpha_p = rng.uniform(0.1, 3.0)
    m = float(rng.uniform(0.5, 2.0))
    alpha = float(alpha_p * (params.p - 1.0))
    compensate = rng.random() < 0.8 and not (lo == 0 and alpha <= params.d - 2)
    return PowerBump(m, alpha, float(lo), float(hi), compensate, params.d)


def random_weight(rng: np.random.Generator, params: ProblemParams) -> RadialWeightSpec:
    """One to three pieces (constants and power bumps) inside ``[0, 1]``.

    Pieces may touch, leave gaps where the weight vanishes, or start at the
    origin, so the decomposition varies between one and three intervals.
    """
    n = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(0.0, 1.0, 2 * n))
    if rng.random() < 0.3:
        cuts[0] = 0.0
    if rng.random() < 0.3:
        cuts[-1] = 1.0
    pieces = []
    for k in range(n):
        lo, hi = cuts[2 * k], cuts[2 * k + 1]
        if pieces and rng.random() < 0.3:
            lo = pieces[-1].hi  # touching pieces
        if hi - lo < 0.05:
            continue
        if rng.random() < 0.4:
            pieces.append(Constant(float(rng.uniform(0.2, 5.0)), float(lo), float(hi)))
        else:
            pieces.append(random_bump(rng, params, lo, hi))
    if not pieces:
        pieces.append(Constant(1.0, 0.0, 1.0))
    return RadialWeightSpec(tuple(pieces))


def random_profile(
    rng: np.random.Generator, lo: float, hi: float, n_nodes: int | None = None, amplitude: float = 10.0
) -> RadialProfile:
    """Piecewise-linear profile with 4 to 64 nodes and values in ``[-amplitude, amplitude]``."""
    n = int(n_nodes if n_nodes is not None else rng.integers(4, 65))
    inner = np.sort(rng.uniform(lo, hi, n - 2))
    grid = np.concatenate([[lo], inner, [hi]])
    # drop coincident draws so every cell has positive length
    grid = np.unique(grid)
    return RadialProfile(grid, rng.uniform(-amplitude, amplitude, grid.size))


@dataclass(frozen=True)
class BlowupCase:
    spec: RadialWeightSpec
    params: ProblemParams
    blowup: PowerBlowup

    def deltas(self, n: int = 12, gap: float = 1e-5) -> np.ndarray:
        """Geometric deltas ending where both table distances are of order ``gap``.

        The relative energy gap is ``(delta / h)**kappa`` while the fidelity
        distance scales like its ``p``-th root, so the last delta is
        ``h * (gap / 2)**(p / kappa)``.
        """
        h, kappa = self.blowup.h, self.blowup.kappa
        smallest = h * (0.5 * gap) ** (self.params.p / kappa)
        largest = 0.25 * h
        return np.geomspace(largest, smallest, n)


def random_blowup(
    rng: np.random.Generator, params: ProblemParams, kappa_range=None, alpha_p_range=(1.2, 3.0)
) -> BlowupCase:
    """Power bump with a non-integrable kernel at both ends and a matched singular profile.

    The profile derivative behaves like ``(r - a)**(-gamma)`` at the left end,
    with ``gamma`` chosen so that the energy exponent ``kappa`` lies in
    ``kappa_range`` (default ``(0.75 p, 1.5 p)``, which keeps the deltas of
    ``BlowupCase.deltas`` well above rounding level).  When ``gamma > 1`` the
    profile itself is unbounded.
    """
    p = params.p
    if kappa_range is None:
        kappa_range = (0.75 * p, 1.5 * p)
    while True:
        alpha_p = rng.uniform(*alpha_p_range)
        alpha = alpha_p * (p - 1.0)
        kappa = rng.uniform(kappa_range[0], min(kappa_range[1], alpha + 1.0))
        gamma = (alpha + 1.0 - kappa) / p
        if gamma > 0:
            break
    lo = float(rng.uniform(0.05, 0.4))
    hi = float(rng.uniform(lo + 0.3, 1.0))
    bump = PowerBump(float(rng.uniform(0.5, 2.0)), float(alpha), lo, hi, True, params.d)
    blow = power_blowup(bump, params, float(rng.uniform(0.5, 2.0)), float(gamma), float(rng.uniform(-1.0, 1.0)))
    return BlowupCase(RadialWeightSpec((bump,)), params, blow)


def random_polar_competitor(
    rng: np.random.Generator, v: np.ndarray, n_angles: int = 16, amplitude: float | None = None
) -> PolarCompetitor:
    """``v(r)`` plus a random perturbation on the (radius x angle) grid.

    Half of the draws are smooth (a few angular modes with random radial
    amplitudes), the rest are i.i.d. noise, which is the harder case for the
    angular-derivative term.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    scale = amplitude if amplitude is not None else 10.0 ** rng.uniform(-4, 0) * (1.0 + float(np.max(np.abs(v))))
    theta = 2.0 * math.pi * np.arange(n_angles) / n_angles
    if rng.random() < 0.5:
        Z = np.zeros((n, n_angles))
        for k in range(int(rng.integers(0, 4)) + 1):
            radial = rng.normal(size=n)
            Z += np.outer(radial, np.cos(k * theta + rng.uniform(0, 2 * math.pi)))
    else:
        Z = rng.normal(size=(n, n_angles))
    return PolarCompetitor(v[:, None] + scale * Z)
