"""Radial profiles ``v`` with ``u(x) = v(|x|)``.

``RadialProfile`` is piecewise linear on a grid.  A radius may appear twice in
the grid, which encodes a jump; values are right-continuous there.  Jumps are
harmless at degenerate points between intervals and give infinite energy
anywhere inside one.

``AnalyticProfile`` wraps a closed-form ``v`` with derivative ``dv`` and is
used for profiles that blow up at an interval end.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .quadrature import (
    DEFAULT_CONFIG,
    AnalysisInconclusive,
    QuadratureConfig,
    ToleranceNotMet,
    endpoint_exponent,
    graded_quad,
    is_integrable_exponent,
)

__all__ = ["AnalyticProfile", "NotInDomain", "RadialProfile", "read_profile_csv", "write_profile_csv"]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.array(self.grid, dtype=float)
        v = np.array(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise ValueError("grid and values must be 1-D arrays of equal length >= 2")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise ValueError("grid and values must be finite")
        dr = np.diff(r)
        if np.any(dr < 0):
            raise ValueError("grid must be nondecreasing")
        if np.any((dr[:-1] == 0) & (dr[1:] == 0)):
            raise ValueError("a radius may appear at most twice")
        if dr[0] == 0 or dr[-1] == 0:
            raise ValueError("the first and last cells must have positive length")
        r.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "grid", r)
        object.__setattr__(self, "values", v)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_function(cls, f: Callable, grid) -> "RadialProfile":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid), dtype=float))

    @classmethod
    def constant(cls, c: float, lo: float, hi: float) -> "RadialProfile":
        return cls(np.array([lo, hi]), np.array([c, c], dtype=float))

    # -- evaluation -------------------------------------------------------

    def _locate(self, r, side):
        r = np.asarray(r, dtype=float)
        x, v = self.grid, self.values
        k = np.clip(np.searchsorted(x, r, side=side) - 1, 0, x.size - 2)
        h = x[k + 1] - x[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(h > 0, (r - x[k]) / np.where(h > 0, h, 1.0), 1.0)
        t = np.clip(t, 0.0, 1.0)
        return r, k, t

    def value(self, r):
        """Right-continuous value, extended constantly beyond the grid."""
        r, k, t = self._locate(r, "right")
        v = self.values
        out = v[k] + t * (v[k + 1] - v[k])
        return out if out.ndim else float(out)

    def value_left(self, r):
        r, k, t = self._locate(r, "left")
        v = self.values
        out = np.where(t == 0.0, v[k], v[k] + t * (v[k + 1] - v[k]))
        out = np.where(r <= self.grid[0], v[0], out)
        return out if out.ndim else float(out)

    __call__ = value

    @property
    def slopes(self) -> np.ndarray:
        h = np.diff(self.grid)
        dv = np.diff(self.values)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(h > 0, dv / np.where(h > 0, h, 1.0), 0.0)

    def slope(self, r):
        r = np.asarray(r, dtype=float)
        x = self.grid
        k = np.searchsorted(x, r, side="right") - 1
        inside = (k >= 0) & (k < x.size - 1)
        out = np.where(inside, self.slopes[np.clip(k, 0, x.size - 2)], 0.0)
        return out if out.ndim else float(out)

    @property
    def jumps(self) -> list[tuple[float, float]]:
        """``(radius, right - left)`` for every double node."""
        dup = np.nonzero(np.diff(self.grid) == 0)[0]
        return [(float(self.grid[k]), float(self.values[k + 1] - self.values[k])) for k in dup]

    def covers(self, lo: float, hi: float) -> bool:
        tol = 1e-12 * max(1.0, abs(hi))
        return self.grid[0] <= lo + tol and self.grid[-1] >= hi - tol

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        x = np.unique(self.grid)
        return x[(x > lo) & (x < hi)]

    def crossings(self, level: float, lo: float, hi: float) -> np.ndarray:
        """Radii in ``(lo, hi)`` where a cell crosses ``level`` strictly.

        ``|v - level|**p`` has a kink there, so quadratures use them as breakpoints.
        """
        x, v = self.grid, self.values - level
        k = np.nonzero(v[:-1] * v[1:] < 0)[0]
        r = x[k] + v[k] / (v[k] - v[k + 1]) * (x[k + 1] - x[k])
        return r[(r > lo) & (r < hi)]

    # -- energy -----------------------------------------------------------

    def weighted_energy(self, model, p: float, lo: float, hi: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
        """``int_lo^hi r**(d-1) eta |v'|**p dr`` with exact cell moments.

        A jump strictly inside ``(lo, hi)`` makes the energy infinite.
        """
        for r, size in self.jumps:
            if lo < r < hi and size != 0.0:
                return math.inf
        x = self.grid
        s = np.clip(x[:-1], lo, hi)
        t = np.clip(x[1:], lo, hi)
        live = t > s
        if not np.any(live):
            return 0.0
        # nothing beyond the grid contributes: the constant extension has slope 0
        m = model.moment(s[live], t[live])
        return float(np.sum(m * np.abs(self.slopes[live]) ** p))

    # -- algebra ----------------------------------------------------------

    def _merged(self, other: "RadialProfile"):
        pts = np.unique(np.concatenate([self.grid, other.grid]))
        grid, a, b = [], [], []
        for r in pts:
            la, ra = self.value_left(r), self.value(r)
            lb, rb = other.value_left(r), other.value(r)
            if (la != ra and self._has_node(r)) or (lb != rb and other._has_node(r)):
                grid += [r, r]
                a += [la, ra]
                b += [lb, rb]
            else:
                grid.append(r)
                a.append(ra)
                b.append(rb)
        return np.array(grid), np.array(a), np.array(b)

    def _has_node(self, r) -> bool:
        return bool(np.count_nonzero(self.grid == r) == 2)

    def __add__(self, other):
        if isinstance(other, RadialProfile):
            g, a, b = self._merged(other)
            return RadialProfile(g, a + b)
        return RadialProfile(self.grid, self.values + float(other))

    __radd__ = __add__

    def __neg__(self):
        return RadialProfile(self.grid, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, lam):
        return RadialProfile(self.grid, float(lam) * self.values)

    __rmul__ = __mul__

    def restricted(self, lo: float, hi: float) -> "RadialProfile":
        """Profile equal to ``v`` on ``[lo, hi]`` and constant outside it."""
        inner = self.grid[(self.grid > lo) & (self.grid < hi)]
        grid = np.concatenate([[lo], inner, [hi]])
        vals = np.concatenate([[self.value(lo)], self.values[(self.grid > lo) & (self.grid < hi)], [self.value_left(hi)]])
        return RadialProfile(grid, vals)


@dataclass(frozen=True, eq=False)
class AnalyticProfile:
    """Closed-form profile ``v`` on ``[lo, hi]`` with derivative ``dv``.

    ``clip`` freezes ``v`` outside ``[clip[0], clip[1]]`` (the Lipschitz
    approximants); ``singular`` lists the ends where ``v`` or ``dv`` may blow up.
    """

    v: Callable
    dv: Callable
    lo: float
    hi: float
    clip: tuple | None = None
    singular: tuple = ()
    breaks: tuple = ()
    label: str = field(default="", compare=False)

    @property
    def active(self) -> tuple[float, float]:
        if self.clip is None:
            return (self.lo, self.hi)
        return (max(self.lo, self.clip[0]), min(self.hi, self.clip[1]))

    def clipped(self, lo: float, hi: float) -> "AnalyticProfile":
        return AnalyticProfile(self.v, self.dv, self.lo, self.hi, (lo, hi), self.singular, self.breaks, self.label)

    def value(self, r):
        c0, c1 = self.active
        r = np.clip(np.asarray(r, dtype=float), c0, c1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.v(r), dtype=float)
        return out if out.ndim else float(out)

    __call__ = value

    def slope(self, r):
        c0, c1 = self.active
        r = np.asarray(r, dtype=float)
        inside = (r > c0) & (r < c1)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.asarray(self.dv(np.clip(r, c0, c1)), dtype=float)
        out = np.where(inside, d, 0.0)
        return out if out.ndim else float(out)

    def covers(self, lo: float, hi: float) -> bool:
        tol = 1e-12 * max(1.0, abs(hi))
        return self.lo <= lo + tol and self.hi >= hi - tol

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        pts = np.array([*self.breaks, *(self.clip or ())], dtype=float)
        return np.unique(pts[(pts > lo) & (pts < hi)])

    def crossings(self, level: float, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)

    def weighted_energy(self, model, p: float, lo: float, hi: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
        c0, c1 = self.active
        s, t = max(lo, c0), min(hi, c1)
        if not t > s:
            return 0.0
        d = model.params.d
        spec = model.spec

        def f(r):
            return r ** (d - 1) * float(spec(r)) * abs(float(self.dv(r))) ** p

        # singular ends still grade the quadrature after clipping
        zl = next((z for z in self.singular if z <= s and s - z <= 0.5 * (t - s)), None)
        zr = next((z for z in self.singular if z >= t and z - t <= 0.5 * (t - s)), None)
        for z, end, direction in ((zl, s, 1), (zr, t, -1)):
            if z is None or z != end:
                continue
            # the exponent is a property of the profile, so size the windows by its extent
            span = 1e-3 * (self.hi - self.lo)
            try:
                beta = endpoint_exponent(lambda x, y: graded_quad(f, x, y, config=config), z, direction, span)
                if not is_integrable_exponent(beta):
                    return math.inf
            except ToleranceNotMet:
                return math.inf
        pts = [s, *self.breakpoints_in(s, t), t]
        total = 0.0
        for k, (x, y) in enumerate(zip(pts[:-1], pts[1:])):
            total += graded_quad(
                f, x, y, zl if k == 0 else None, zr if k == len(pts) - 2 else None, config
            )
        return total


def read_profile_csv(path, column: str | None = None) -> RadialProfile:
    """Read a two-column CSV (radius then value) with a header row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], [row for row in rows[1:] if row]
    j = header.index(column) if column else 1
    data = np.array([[float(row[0]), float(row[j])] for row in body])
    return RadialProfile(data[:, 0], data[:, 1])


def write_profile_csv(path, profile: RadialProfile, names=("r", "v")) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r, v in zip(profile.grid, profile.values):
            w.writerow([f"{r:.17g}", f"{v:.17g}"])


class NotInDomain(ValueError):
    """The weighted Dirichlet energy of a profile is infinite on some interval."""

    def __init__(self, message: str, interval: int | None = None):
        super().__init__(message)
        self.interval = interval
