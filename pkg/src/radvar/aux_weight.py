"""The auxiliary weight ``eta_hat_p`` and the truncated weight.

On each degeneracy interval ``(a, b)`` with quarter points ``q1, q2`` and
midpoint ``mid``, the auxiliary weight is the reciprocal of the kernel integral
from the evaluation point to ``mid`` on ``(a, q1)``, the mirrored quantity on
``(q2, b)``, and a constant on ``[q1, q2]``.  At an end it is 0 when the kernel
is not integrable there and the reciprocal of the half-interval integral
otherwise.  The d-dimensional weight is ``w_hat = eta_hat / omega_d``.

The mid-band constant defaults to ``mid_rule="min"``: the smaller of the two
one-sided band values at ``q1`` and ``q2``.  This keeps the pointwise
oscillation bounds valid on both halves for asymmetric weights.
``mid_rule="left"`` takes the left value at ``q1`` instead; when the two
one-sided values differ, either rule leaves a jump at one quarter point, which
``AuxBand.jumps`` reports.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .weight_model import (
    DegeneracyDecomposition,
    KernelModel,
    ProblemParams,
    RadialWeightSpec,
    kernel_model,
)

__all__ = [
    "AuxBand",
    "AuxWeight",
    "BoundaryBehavior",
    "OutsideMonotoneBand",
    "aux_derivative",
    "boundary_behavior",
    "build_aux_weight",
    "eval_aux",
    "eval_truncated",
]


class OutsideMonotoneBand(ValueError):
    """The radius is not strictly inside ``(a_i, q1_i)`` or ``(q2_i, b_i)``."""


class BoundaryBehavior(enum.Enum):
    VANISHING_LIMIT = "VanishingLimit"
    FINITE_EXTENSION = "FiniteExtension"


@dataclass(frozen=True, eq=False)
class AuxBand:
    a: float
    b: float
    left_integrable: bool
    right_integrable: bool
    mid_value: float
    left_value: float
    right_value: float
    # one-sided band limits at q1 (from the left) and q2 (from the right)
    q1_limit: float
    q2_limit: float
    model: KernelModel

    @property
    def q1(self) -> float:
        return 0.25 * (3.0 * self.a + self.b)

    @property
    def mid(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def q2(self) -> float:
        return 0.25 * (self.a + 3.0 * self.b)

    @property
    def jumps(self) -> dict:
        """Differences ``eta_hat(q) - eta_hat(q-)`` at ``q1`` and ``eta_hat(q+) - eta_hat(q)`` at ``q2``."""
        return {"q1": self.mid_value - self.q1_limit, "q2": self.q2_limit - self.mid_value}

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        left = (t > self.a) & (t < self.q1)
        right = (t > self.q2) & (t < self.b)
        middle = (t >= self.q1) & (t <= self.q2)
        if np.any(left):
            out[left] = 1.0 / self.model.integral(t[left], self.mid)
        if np.any(right):
            out[right] = 1.0 / self.model.integral(self.mid, t[right])
        out[middle] = self.mid_value
        out[t == self.a] = self.left_value
        out[t == self.b] = self.right_value
        return out


@dataclass(frozen=True, eq=False)
class AuxWeight:
    bands: tuple
    params: ProblemParams
    spec: RadialWeightSpec
    mid_rule: str = "min"

    def eval(self, t):
        """``eta_hat_p(t)``; zero off the closed degeneracy intervals."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for band in self.bands:
            mask = (t >= band.a) & (t <= band.b)
            if np.any(mask):
                out[mask] = band.eval(t[mask])
        return out if out.ndim else float(out)

    __call__ = eval

    def w_hat(self, t):
        """Radial profile of the d-dimensional weight, ``eta_hat_p / omega_d``."""
        return self.eval(t) / self.params.omega_d

    def band_of(self, t: float) -> AuxBand | None:
        for band in self.bands:
            if band.a < t < band.b:
                return band
        return None

    def breakpoints(self, lo=-math.inf, hi=math.inf) -> np.ndarray:
        pts = []
        for band in self.bands:
            pts += [band.a, band.q1, band.mid, band.q2, band.b]
            pts += list(band.model.breakpoints(band.a, band.b))
        pts = np.unique(pts)
        return pts[(pts > lo) & (pts < hi)]

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return [(band.a, band.b) for band in self.bands]

    def sup(self) -> float:
        """Largest value over the intervals (attained on the mid band or its edges)."""
        vals = [max(b.mid_value, b.q1_limit, b.q2_limit, b.left_value, b.right_value) for b in self.bands]
        return max(vals, default=0.0)


def build_aux_weight(
    decomp: DegeneracyDecomposition,
    spec: RadialWeightSpec,
    params: ProblemParams,
    config: QuadratureConfig | None = None,
    mid_rule: Literal["min", "left"] = "min",
) -> AuxWeight:
    if mid_rule not in ("min", "left"):
        raise ValueError(f"unknown mid_rule {mid_rule!r}")
    model = kernel_model(spec, params, config or DEFAULT_CONFIG)
    bands = []
    for (a, b), li, ri in zip(decomp.intervals, decomp.left_integrable, decomp.right_integrable):
        mid = 0.5 * (a + b)
        q1, q2 = 0.25 * (3 * a + b), 0.25 * (a + 3 * b)
        k_left, k_right = model.integral([q1, mid], [mid, q2])
        q1_limit, q2_limit = 1.0 / k_left, 1.0 / k_right
        mid_value = q1_limit if mid_rule == "left" else min(q1_limit, q2_limit)
        half_l, half_r = model.integral([a, mid], [mid, b])
        bands.append(
            AuxBand(
                a=a,
                b=b,
                left_integrable=li,
                right_integrable=ri,
                mid_value=mid_value,
                left_value=1.0 / half_l if li else 0.0,
                right_value=1.0 / half_r if ri else 0.0,
                q1_limit=q1_limit,
                q2_limit=q2_limit,
                model=model,
            )
        )
    return AuxWeight(tuple(bands), params, spec, mid_rule)


def eval_aux(aux: AuxWeight, t):
    return aux.eval(t)


def eval_truncated(aux: AuxWeight, spec: RadialWeightSpec, t):
    """``min(eta, eta_hat_p, 1)``."""
    out = np.minimum(np.minimum(spec(t), aux.eval(t)), 1.0)
    return out if np.ndim(out) else float(out)


def aux_derivative(aux: AuxWeight, spec: RadialWeightSpec, params: ProblemParams, t):
    """``d eta_hat_p / dr = +/- eta_hat_p**2 * (r**(d-1) eta)**(-1/(p-1))`` on the monotone bands."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape)
    for k, tk in enumerate(t_arr):
        band = aux.band_of(tk)
        if band is None or not (tk < band.q1 or tk > band.q2):
            raise OutsideMonotoneBand(f"radius {tk!r} is not inside a monotone band")
        sign = 1.0 if tk < band.q1 else -1.0
        out[k] = sign * band.eval(tk) ** 2 * band.model.kernel(tk)
    return out if np.ndim(t) else float(out[0])


def boundary_behavior(aux: AuxWeight, decomp: DegeneracyDecomposition, i: int, side: Literal["left", "right"]) -> BoundaryBehavior:
    """Classify interval end ``i`` (0-based) by integrability of the kernel there."""
    if not 0 <= i < decomp.n_eta:
        raise IndexError(f"interval index {i} out of range for N_eta = {decomp.n_eta}")
    flag = decomp.left_integrable[i] if side == "left" else decomp.right_integrable[i]
    return BoundaryBehavior.FINITE_EXTENSION if flag else BoundaryBehavior.VANISHING_LIMIT
