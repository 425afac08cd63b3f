"""Radial weights ``w(x) = eta(|x|)`` and the degeneracy decomposition of their support.

A weight is a list of pieces with disjoint interiors.  Internally each piece
is cut into *atoms*: maximal stretches on which ``eta > 0`` and the inverse
kernel ``(s**(d-1) * eta(s))**(-1/(p-1))`` is bounded away from the stretch
ends.  Every atom knows the singular exponent of the kernel at its two ends,
which is all the decomposition needs: touching atoms merge when the kernel is
integrable on both sides of the shared point, and the merged chains are the
degeneracy intervals ``(a_i, b_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Literal, Sequence, Union

import numpy as np
from scipy.special import gamma

from .quadrature import (
    DEFAULT_CONFIG,
    AnalysisInconclusive,
    DomainMismatch,
    QuadratureConfig,
    endpoint_exponent,
    graded_quad,
    is_integrable_exponent,
    power_integral,
)

__all__ = [
    "AnalysisInconclusive",
    "Constant",
    "DegeneracyDecomposition",
    "KernelModel",
    "PowerBump",
    "ProblemParams",
    "RadialWeightSpec",
    "Tabulated",
    "decompose_degeneracy",
    "endpoint_integrability",
    "eval_weight",
    "kernel_model",
]

_TOUCH = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class ProblemParams:
    """Dimension ``d``, growth exponent ``p`` and the annulus ``a < |x| < b``."""

    d: int
    p: float
    a: float
    b: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if not 0 <= self.a < self.b:
            raise ValueError(f"need 0 <= a < b, got a={self.a!r}, b={self.b!r}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def omega_d(self) -> float:
        """Surface measure of the unit sphere in R^d (2 for d = 1)."""
        return 2.0 * math.pi ** (self.d / 2.0) / gamma(self.d / 2.0)


# ---------------------------------------------------------------------------
# pieces


@dataclass(frozen=True)
class Constant:
    c: float
    lo: float
    hi: float
    kind: Literal["constant"] = field(default="constant", init=False)

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("constant piece needs c >= 0")
        if not self.hi > self.lo >= 0:
            raise ValueError("constant piece needs 0 <= lo < hi")

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        return np.where((r >= self.lo) & (r <= self.hi), self.c, 0.0)

    def scalar(self, r: float) -> float:
        return self.c if self.lo <= r <= self.hi else 0.0

    def scaled(self, lam: float) -> "Constant":
        return Constant(self.c * lam, self.lo, self.hi)


@dataclass(frozen=True)
class PowerBump:
    """``m * dist(r)**alpha``, ``dist`` the distance to the nearer end of ``[lo, hi]``.

    With ``compensate`` the bump carries an extra factor ``r**(1-d)`` so that
    ``r**(d-1) * eta`` is a pure power near each end.
    """

    m: float
    alpha: float
    lo: float
    hi: float
    compensate: bool = True
    d: int = 1
    kind: Literal["power_bump"] = field(default="power_bump", init=False)

    def __post_init__(self):
        if not (self.m > 0 and self.alpha > 0):
            raise ValueError("power bump needs m > 0 and alpha > 0")
        if not self.hi > self.lo >= 0:
            raise ValueError("power bump needs 0 <= lo < hi")
        if self.compensate and self.lo == 0 and self.alpha <= self.d - 2:
            raise ValueError("compensated bump at r = 0 is not locally integrable")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.lo) & (r <= self.hi)
        dist = np.where(inside, np.minimum(r - self.lo, self.hi - r), 0.0)
        val = self.m * dist**self.alpha
        if self.compensate and self.d != 1:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                val = val * np.where(r > 0, r, np.inf) ** (1 - self.d)
        return np.where(inside, val, 0.0)

    def scalar(self, r: float) -> float:
        if not self.lo <= r <= self.hi:
            return 0.0
        val = self.m * min(r - self.lo, self.hi - r) ** self.alpha
        if self.compensate and self.d != 1:
            val = val * r ** (1 - self.d) if r > 0 else math.inf
        return val

    def scaled(self, lam: float) -> "PowerBump":
        return PowerBump(self.m * lam, self.alpha, self.lo, self.hi, self.compensate, self.d)


@dataclass(frozen=True)
class Tabulated:
    """Samples of ``eta`` joined by linear interpolation; values below ``floor`` count as 0."""

    radii: tuple
    values: tuple
    floor: float = 1e-300
    kind: Literal["tabulated"] = field(default="tabulated", init=False)

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(x) for x in self.radii))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        r = np.asarray(self.radii)
        if r.size < 2 or r.size != len(self.values):
            raise ValueError("tabulated piece needs >= 2 radii and matching values")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ValueError("tabulated radii must be nonnegative and strictly increasing")
        if np.any(np.asarray(self.values) < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("tabulated values must be finite and nonnegative")

    @property
    def lo(self) -> float:
        return self.radii[0]

    @property
    def hi(self) -> float:
        return self.radii[-1]

    @cached_property
    def nodes(self):
        v = np.asarray(self.values)
        return np.asarray(self.radii), np.where(v < self.floor, 0.0, v)

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        x, v = self.nodes
        out = np.maximum(np.interp(r, x, v), 0.0)
        return np.where((r >= self.lo) & (r <= self.hi), out, 0.0)

    def scaled(self, lam: float) -> "Tabulated":
        return Tabulated(self.radii, tuple(lam * v for v in self.values), self.floor)


Piece = Union[Constant, PowerBump, Tabulated]


@dataclass(frozen=True)
class RadialWeightSpec:
    pieces: tuple

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda q: (q.lo, q.hi)))
        object.__setattr__(self, "pieces", pieces)
        for left, right in zip(pieces, pieces[1:]):
            if right.lo < left.hi - _TOUCH * max(1.0, left.hi):
                raise ValueError(f"pieces overlap: {left} and {right}")

    @property
    def support(self) -> tuple[float, float]:
        """Closure ``[a_supp, b_supp]`` of the set where some piece is nonzero."""
        live = [q for q in self.pieces if not (isinstance(q, Constant) and q.c == 0)]
        if not live:
            return (math.nan, math.nan)
        return (min(q.lo for q in live), max(q.hi for q in live))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        for q in self.pieces:
            out = np.maximum(out, q.eval(r))
        return out if out.ndim else float(out)

    def scaled(self, lam: float) -> "RadialWeightSpec":
        return RadialWeightSpec(tuple(q.scaled(lam) for q in self.pieces))

    @property
    def breakpoints(self) -> np.ndarray:
        pts = []
        for q in self.pieces:
            pts += [q.lo, q.hi]
            if isinstance(q, PowerBump):
                pts.append(q.mid)
            elif isinstance(q, Tabulated):
                pts += list(q.radii)
        return np.unique(pts)


def eval_weight(spec: RadialWeightSpec, r):
    """``eta(r)``; zero outside the support."""
    return spec(r)


# ---------------------------------------------------------------------------
# atoms


class _Atom:
    lo: float
    hi: float
    beta_lo: float
    beta_hi: float
    approximate = False

    @property
    def integrable_lo(self) -> bool:
        return self.beta_lo < 1.0

    @property
    def integrable_hi(self) -> bool:
        return self.beta_hi < 1.0

    def breakpoints(self):
        return ()

    def _clip(self, x, y):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        y = np.clip(np.asarray(y, dtype=float), self.lo, self.hi)
        return np.broadcast_arrays(x, np.maximum(x, y))


class _ConstantAtom(_Atom):
    def __init__(self, c, lo, hi, d, p):
        self.c, self.lo, self.hi, self.d, self.p = c, lo, hi, d, p
        self.k = (d - 1) / (p - 1)
        self.scale = c ** (-1.0 / (p - 1))
        self.beta_lo = self.k if (lo == 0 and d > 1) else 0.0
        self.beta_hi = 0.0

    def kernel(self, s):
        return self.scale * np.asarray(s, dtype=float) ** (-self.k)

    def integral(self, x, y):
        x, y = self._clip(x, y)
        return self.scale * power_integral(x, y, self.k)

    def moment(self, x, y):
        x, y = self._clip(x, y)
        return self.c * (y**self.d - x**self.d) / self.d


class _BumpAtom(_Atom):
    """Compensated power bump in its own dimension: ``s**(d-1) eta = m dist**alpha``."""

    def __init__(self, piece: PowerBump, p):
        self.piece = piece
        self.lo, self.hi, self.mid = piece.lo, piece.hi, piece.mid
        self.m, self.alpha = piece.m, piece.alpha
        self.ap = piece.alpha / (p - 1)
        self.scale = piece.m ** (-1.0 / (p - 1))
        self.beta_lo = self.beta_hi = self.ap

    def breakpoints(self):
        return (self.mid,)

    def kernel(self, s):
        s = np.asarray(s, dtype=float)
        dist = np.minimum(s - self.lo, self.hi - s)
        with np.errstate(divide="ignore"):
            return self.scale * dist ** (-self.ap)

    def integral(self, x, y):
        x, y = self._clip(x, y)
        lo, hi, mid = self.lo, self.hi, self.mid
        left = power_integral(np.minimum(x, mid) - lo, np.minimum(y, mid) - lo, self.ap)
        right = power_integral(hi - np.maximum(y, mid), hi - np.maximum(x, mid), self.ap)
        return self.scale * (left + right)

    def moment(self, x, y):
        x, y = self._clip(x, y)
        lo, hi, mid, e = self.lo, self.hi, self.mid, self.alpha + 1.0
        xl, yl = np.minimum(x, mid) - lo, np.minimum(y, mid) - lo
        xr, yr = hi - np.maximum(y, mid), hi - np.maximum(x, mid)
        return self.m * ((yl**e - xl**e) + (yr**e - xr**e)) / e


class _QuadAtom(_Atom):
    """A single-stretch piece without a closed form, split at its midpoint.

    Power bumps use panel Gauss rules in the log-distance to the nearer end;
    integrals reaching a singular end fall back to adaptive quadrature.
    """

    def __init__(self, piece, lo, hi, beta_lo, beta_hi, d, p, config):
        self.piece, self.eta, self.lo, self.hi = piece, piece.eval, lo, hi
        self.mid = 0.5 * (lo + hi)
        self.beta_lo, self.beta_hi = beta_lo, beta_hi
        self.d, self.p, self.config = d, p, config

    def breakpoints(self):
        return (self.mid,)

    def kernel(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return (s ** (self.d - 1) * self.eta(s)) ** (-1.0 / (self.p - 1))

    def _offset(self, side, power):
        """``(r**(d-1) eta)**power`` at ``r = lo + t`` or ``hi - t`` with the distance kept exact."""
        q, d1 = self.piece, self.d - 1
        comp = q.compensate and q.d != 1
        width = q.hi - q.lo

        # log space, so that m * t**alpha cannot underflow before the negative power;
        # the clamp only bites for subnormal t, where t * f(t) is negligible anyway
        r_exp = (d1 + (1 - q.d if comp else 0)) * power
        log_m = power * math.log(q.m)

        def f(t):
            r = q.lo + t if side < 0 else q.hi - t
            if r <= 0:
                return 0.0 if power > 0 else math.inf
            e = log_m + q.alpha * power * math.log(min(t, width - t))
            if r_exp:
                e += r_exp * math.log(r)
            return math.exp(min(e, 700.0))

        return f

    def _scalar(self, f, x, y, beta_lo, beta_hi, power=None):
        mid = self.mid
        zl = self.lo if beta_lo != 0 else None
        zr = self.hi if beta_hi != 0 else None
        power = -1.0 / (self.p - 1) if power is None else power
        exact = isinstance(self.piece, PowerBump)
        total = 0.0
        if x < mid:
            off = self._offset(-1, power) if exact and zl is not None else None
            total += graded_quad(f, x, min(y, mid), zl, None, self.config, off)
        if y > mid:
            off = self._offset(1, power) if exact and zr is not None else None
            total += graded_quad(f, max(x, mid), y, None, zr, self.config, off)
        return total

    def _offset_vec(self, side, power, t):
        q, d1 = self.piece, self.d - 1
        r = q.lo + t if side < 0 else q.hi - t
        r_exp = (d1 + (1 - q.d if q.compensate and q.d != 1 else 0)) * power
        out = q.m**power * np.minimum(t, (q.hi - q.lo) - t) ** (q.alpha * power)
        return out * r**r_exp if r_exp else out

    def _panels(self, side, power, t0, t1):
        """Gauss-Legendre panels of unit length in ``u = log(t)``, ``0 < t0 < t1``.

        The integrand is analytic in a strip of half-width pi around the real
        ``u`` axis, so 12 nodes per panel reach roundoff.
        """
        u0, u1 = np.log(t0), np.log(t1)
        npan = np.maximum(1, np.ceil(u1 - u0)).astype(int)
        owner = np.repeat(np.arange(t0.size), npan)
        k = np.arange(owner.size) - np.repeat(np.cumsum(npan) - npan, npan)
        width = ((u1 - u0) / npan)[owner]
        left = u0[owner] + k * width
        u = left[:, None] + 0.5 * width[:, None] * (_GL_X[None, :] + 1.0)
        t = np.exp(u)
        vals = self._offset_vec(side, power, t) * t * (0.5 * width[:, None] * _GL_W[None, :])
        return np.bincount(owner, weights=vals.sum(axis=1), minlength=t0.size)

    def _suffix_panels(self, side, power, t0, t1):
        # queries sharing an upper limit integrate only the gaps between their
        # sorted lower limits; the gaps are positive so the suffix sums do not cancel
        order = np.lexsort((t0, t1))
        a, b = t0[order], t1[order]
        same = np.append(b[1:] == b[:-1], False)
        ends = np.where(same, np.append(a[1:], 0.0), b)
        gaps = self._panels(side, power, a, np.maximum(ends, a))
        sums = gaps.copy()
        starts = np.nonzero(np.append(True, ~same[:-1]))[0]
        stops = np.append(starts[1:], a.size)
        for i, j in zip(starts, stops):
            if j - i > 1:
                sums[i:j] = np.cumsum(gaps[i:j][::-1])[::-1]
        out = np.empty_like(a)
        out[order] = sums
        return out

    def _halves(self, x, y, power):
        f = lambda s: (s ** (self.d - 1) * self.piece.scalar(s)) ** power
        out = np.zeros(x.shape)
        lo, hi, mid = self.lo, self.hi, self.mid
        exact = isinstance(self.piece, PowerBump)
        for side, beta in ((-1, self.beta_lo), (1, self.beta_hi)):
            if side < 0:
                mask = x < mid
                t0, t1 = x[mask] - lo, np.minimum(y[mask], mid) - lo
            else:
                mask = y > mid
                t0, t1 = hi - y[mask], hi - np.maximum(x[mask], mid)
            part = np.zeros(t0.shape)
            fast = (t0 > 0) & (t1 > t0) if exact else np.zeros(t0.shape, dtype=bool)
            if np.any(fast):
                part[fast] = self._suffix_panels(side, power, t0[fast], t1[fast])
            from_end = (t0 == 0) & (t1 > 0) & (power > 0 or beta < 1.0)
            if exact and np.count_nonzero(from_end) > 1:
                # one adaptive integral up to the smallest limit, panels for the rest
                ends = np.unique(t1[from_end])
                if side < 0:
                    s0, s1 = lo, lo + ends[0]
                else:
                    s0, s1 = hi - ends[0], hi
                b_lo = beta if (side < 0 and power < 0) or (power > 0 and lo == 0) else 0.0
                b_hi = beta if side > 0 and power < 0 else 0.0
                base = self._scalar(f, float(s0), float(s1), b_lo, b_hi, power)
                gaps = self._panels(side, power, ends[:-1], ends[1:]) if ends.size > 1 else np.zeros(0)
                cum = base + np.concatenate([[0.0], np.cumsum(gaps)])
                part[from_end] = cum[np.searchsorted(ends, t1[from_end])]
                fast = fast | from_end
            for k in np.nonzero(~fast & (t1 > t0))[0]:
                if t0[k] == 0 and power < 0 and not beta < 1.0:
                    part[k] = math.inf
                    continue
                if side < 0:
                    s0, s1 = lo + t0[k], lo + t1[k]
                else:
                    s0, s1 = hi - t1[k], hi - t0[k]
                b_lo = beta if (side < 0 and power < 0) or (power > 0 and lo == 0) else 0.0
                b_hi = beta if side > 0 and power < 0 else 0.0
                part[k] = self._scalar(f, float(s0), float(s1), b_lo, b_hi, power)
            out[mask] += part
        return out

    def integral(self, x, y):
        x, y = self._clip(x, y)
        out = self._halves(np.ravel(x), np.ravel(y), -1.0 / (self.p - 1)).reshape(x.shape)
        return out if out.ndim else float(out)

    def moment(self, x, y):
        x, y = self._clip(x, y)
        out = self._halves(np.ravel(x), np.ravel(y), 1.0).reshape(x.shape)
        return out if out.ndim else float(out)


class _TabulatedAtom(_Atom):
    """A positive stretch of a tabulated piece: linear cells between zero nodes."""

    approximate = True

    def __init__(self, x, v, d, p, config):
        self.x, self.v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        self.lo, self.hi = float(self.x[0]), float(self.x[-1])
        self.d, self.p, self.config = d, p, config
        self.beta_lo = self._end_exponent(0)
        self.beta_hi = self._end_exponent(-1)

    def breakpoints(self):
        return tuple(self.x)

    def _end_exponent(self, end):
        z = self.x[end]
        if self.v[end] > 0:
            return (self.d - 1) / (self.p - 1) if (z == 0 and self.d > 1) else 0.0
        direction = 1 if end == 0 else -1
        cell = self.x[1] - self.x[0] if end == 0 else self.x[-1] - self.x[-2]
        beta = endpoint_exponent(
            lambda s, t: self._cell_integral(0 if end == 0 else len(self.x) - 2, s, t),
            z,
            direction,
            span=1e-2 * cell,
        )
        # quantise onto the decision: strictly below 1 or divergent
        return beta if is_integrable_exponent(beta) else max(beta, 1.0)

    def kernel(self, s):
        s = np.asarray(s, dtype=float)
        eta = np.interp(s, self.x, self.v)
        with np.errstate(divide="ignore"):
            return (s ** (self.d - 1) * eta) ** (-1.0 / (self.p - 1))

    def _cell_integral(self, j, s, t):
        x0, x1 = self.x[j], self.x[j + 1]
        v0, v1 = self.v[j], self.v[j + 1]
        slope = (v1 - v0) / (x1 - x0)
        d, q = self.d, -1.0 / (self.p - 1)

        def f(r):
            # measure from the zero end so the vanishing factor keeps its digits
            eta = v1 - slope * (x1 - r) if v1 == 0 else v0 + slope * (r - x0)
            return (r ** (d - 1) * eta) ** q

        def from_left(t):
            return ((x0 + t) ** (d - 1) * (v0 + slope * t)) ** q

        def from_right(t):
            return ((x1 - t) ** (d - 1) * (v1 - slope * t)) ** q

        zl = x0 if (v0 == 0 or (x0 == 0 and d > 1)) else None
        zr = x1 if v1 == 0 else None
        if zl is not None and zr is not None:
            m = 0.5 * (x0 + x1)
            total = 0.0
            if s < m:
                total += graded_quad(f, s, min(t, m), zl, None, self.config, from_left)
            if t > m:
                total += graded_quad(f, max(s, m), t, None, zr, self.config, from_right)
            return total
        off = from_left if zl is not None else (from_right if zr is not None else None)
        return graded_quad(f, s, t, zl, zr, self.config, off)

    @cached_property
    def _full_cells(self):
        n = len(self.x) - 1
        out = np.empty(n)
        for j in range(n):
            if (j == 0 and not self.integrable_lo) or (j == n - 1 and not self.integrable_hi):
                out[j] = math.inf
            else:
                out[j] = self._cell_integral(j, self.x[j], self.x[j + 1])
        return out

    def _scalar(self, s, t):
        if t <= s:
            return 0.0
        if (s == self.lo and not self.integrable_lo) or (t == self.hi and not self.integrable_hi):
            return math.inf
        n = len(self.x) - 1
        js = min(int(np.searchsorted(self.x, s, side="right")) - 1, n - 1)
        jt = min(int(np.searchsorted(self.x, t, side="left")) - 1, n - 1)
        js, jt = max(js, 0), max(jt, 0)
        if js == jt:
            return self._cell_integral(js, s, t)
        total = self._cell_integral(js, s, self.x[js + 1])
        if jt > js + 1:
            total += float(np.sum(self._full_cells[js + 1 : jt]))
        return total + self._cell_integral(jt, self.x[jt], t)

    def integral(self, x, y):
        x, y = self._clip(x, y)
        out = np.zeros(x.shape)
        for idx in np.ndindex(x.shape):
            out[idx] = self._scalar(float(x[idx]), float(y[idx]))
        return out if out.ndim else float(out)

    def moment(self, x, y):
        x, y = self._clip(x, y)
        out = np.zeros(x.shape)
        d = self.d
        for idx in np.ndindex(x.shape):
            s, t = float(x[idx]), float(y[idx])
            if t <= s:
                continue
            j0 = max(int(np.searchsorted(self.x, s, side="right")) - 1, 0)
            j1 = min(int(np.searchsorted(self.x, t, side="left")), len(self.x) - 1)
            total = 0.0
            for j in range(j0, j1):
                u, w = max(s, self.x[j]), min(t, self.x[j + 1])
                if w <= u:
                    continue
                slope = (self.v[j + 1] - self.v[j]) / (self.x[j + 1] - self.x[j])
                c0 = self.v[j] - slope * self.x[j]
                total += c0 * (w**d - u**d) / d + slope * (w ** (d + 1) - u ** (d + 1)) / (d + 1)
            out[idx] = total
        return out if out.ndim else float(out)


def _tabulated_atoms(piece: Tabulated, d, p, config):
    # runs of cells that are not identically zero, cut at interior zero nodes
    x, v = piece.nodes
    atoms, run = [], []
    for j in range(len(x) - 1):
        if v[j] == 0 and v[j + 1] == 0:
            continue
        if run and run[-1] == j - 1 and v[j] > 0:
            run.append(j)
        else:
            if run:
                atoms.append(run)
            run = [j]
    if run:
        atoms.append(run)
    return [_TabulatedAtom(x[r[0] : r[-1] + 2], v[r[0] : r[-1] + 2], d, p, config) for r in atoms]


def _bump_exponents(piece: PowerBump, d, p):
    extra_lo = 0.0
    if piece.lo == 0:
        extra_lo = d - (piece.d if piece.compensate else 1)
    return (piece.alpha + extra_lo) / (p - 1), piece.alpha / (p - 1)


# ---------------------------------------------------------------------------
# kernel model


class KernelModel:
    """Atoms of a weight for fixed ``(d, p)`` plus kernel/moment integrals over any range."""

    def __init__(self, spec: RadialWeightSpec, params: ProblemParams, config: QuadratureConfig = DEFAULT_CONFIG):
        self.spec, self.params, self.config = spec, params, config
        d, p = params.d, params.p
        atoms: list[_Atom] = []
        for q in spec.pieces:
            if isinstance(q, Constant):
                if q.c > 0:
                    if config.closed_forms:
                        atoms.append(_ConstantAtom(q.c, q.lo, q.hi, d, p))
                    else:
                        k = (d - 1) / (p - 1) if (q.lo == 0 and d > 1) else 0.0
                        atoms.append(_QuadAtom(q, q.lo, q.hi, k, 0.0, d, p, config))
            elif isinstance(q, PowerBump):
                pure = (q.d if q.compensate else 1) == d
                if config.closed_forms and pure:
                    atoms.append(_BumpAtom(q, p))
                else:
                    blo, bhi = _bump_exponents(q, d, p)
                    atoms.append(_QuadAtom(q, q.lo, q.hi, blo, bhi, d, p, config))
            else:
                atoms.extend(_tabulated_atoms(q, d, p, config))
        self.atoms = sorted(atoms, key=lambda t: t.lo)
        self.chains = self._chain()

    def _chain(self):
        chains: list[list[_Atom]] = []
        for atom in self.atoms:
            if chains:
                prev = chains[-1][-1]
                touching = abs(atom.lo - prev.hi) <= _TOUCH * max(1.0, prev.hi)
                if touching and prev.integrable_hi and atom.integrable_lo:
                    chains[-1].append(atom)
                    continue
            chains.append([atom])
        return chains

    @property
    def approximate(self) -> bool:
        return any(a.approximate for a in self.atoms)

    def breakpoints(self, lo=-math.inf, hi=math.inf) -> np.ndarray:
        pts = []
        for a in self.atoms:
            pts += [a.lo, a.hi, *a.breakpoints()]
        pts = np.unique(pts)
        return pts[(pts > lo) & (pts < hi)]

    def kernel(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, np.inf)
        for a in self.atoms:
            mask = (s > a.lo) & (s < a.hi)
            if np.any(mask):
                out[mask] = a.kernel(s[mask])
        return out if out.ndim else float(out)

    def integral(self, x, y):
        """Kernel integral over ``[x, y]``; ``inf`` unless the range lies in one chain."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        out = np.zeros(x.shape)
        inside = np.zeros(x.shape, dtype=bool)
        for chain in self.chains:
            lo, hi = chain[0].lo, chain[-1].hi
            inside |= (x >= lo) & (y <= hi)
        for a in self.atoms:
            mask = inside & (y > a.lo) & (x < a.hi)
            if np.any(mask):
                out[mask] += a.integral(x[mask], y[mask])
        out = np.where(inside | (y <= x), out, np.inf)
        return out if out.ndim else float(out)

    def moment(self, x, y):
        """``int_x^y s**(d-1) eta(s) ds``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        out = np.zeros(x.shape)
        for a in self.atoms:
            mask = (y > a.lo) & (x < a.hi)
            if np.any(mask):
                out[mask] += a.moment(x[mask], y[mask])
        return out if out.ndim else float(out)


@lru_cache(maxsize=256)
def kernel_model(spec: RadialWeightSpec, params: ProblemParams, config: QuadratureConfig = DEFAULT_CONFIG) -> KernelModel:
    return KernelModel(spec, params, config)


# ---------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class DegeneracyDecomposition:
    intervals: tuple
    left_integrable: tuple
    right_integrable: tuple
    left_exponent: tuple
    right_exponent: tuple
    # integrability decided numerically somewhere (tabulated pieces)
    approximate: bool = False

    @property
    def n_eta(self) -> int:
        return len(self.intervals)

    @property
    def finitely_degenerate(self) -> bool:
        return self.n_eta >= 1

    def index_of(self, r: float) -> int | None:
        for i, (a, b) in enumerate(self.intervals):
            if a < r < b:
                return i
        return None

    def contains(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (r > a) & (r < b)
        return out

    def csv_rows(self):
        for i, ((a, b), li, ri) in enumerate(zip(self.intervals, self.left_integrable, self.right_integrable)):
            yield {"i": i + 1, "a_i": a, "b_i": b, "left_integrable": li, "right_integrable": ri}

    def report(self) -> str:
        lines = [f"N_eta = {self.n_eta}" + (" (approximate)" if self.approximate else "")]
        for row, bl, br in zip(self.csv_rows(), self.left_exponent, self.right_exponent):
            tag = lambda ok: "integrable" if ok else "non-integrable"
            lines.append(
                f"  ({row['a_i']:.17g}, {row['b_i']:.17g}): left {tag(row['left_integrable'])}"
                f" [exponent {bl:.6g}], right {tag(row['right_integrable'])} [exponent {br:.6g}]"
            )
        return "\n".join(lines)


def _check_support(spec: RadialWeightSpec, params: ProblemParams):
    lo, hi = spec.support
    if math.isnan(lo):
        return
    tol = _TOUCH * max(1.0, params.b)
    if lo < params.a - tol or hi > params.b + tol:
        raise DomainMismatch(f"support [{lo}, {hi}] is not contained in [{params.a}, {params.b}]")


def decompose_degeneracy(
    spec: RadialWeightSpec, params: ProblemParams, config: QuadratureConfig | None = None
) -> DegeneracyDecomposition:
    """Maximal open intervals on which the inverse kernel is locally integrable."""
    _check_support(spec, params)
    model = kernel_model(spec, params, config or DEFAULT_CONFIG)
    intervals, li, ri, le, re = [], [], [], [], []
    for chain in model.chains:
        first, last = chain[0], chain[-1]
        intervals.append((first.lo, last.hi))
        li.append(first.integrable_lo)
        ri.append(last.integrable_hi)
        le.append(first.beta_lo)
        re.append(last.beta_hi)
    return DegeneracyDecomposition(tuple(intervals), tuple(li), tuple(ri), tuple(le), tuple(re), model.approximate)


def endpoint_integrability(
    spec: RadialWeightSpec,
    params: ProblemParams,
    interval_end: float,
    side: Literal["left", "right"],
    config: QuadratureConfig | None = None,
) -> bool:
    """Whether the kernel is integrable at an interval end.

    ``side="left"`` names a left end ``a_i`` (integrability on ``(a_i, a_i + eps)``),
    ``side="right"`` a right end ``b_i``.
    """
    dec = decompose_degeneracy(spec, params, config)
    for (a, b), li, ri in zip(dec.intervals, dec.left_integrable, dec.right_integrable):
        if side == "left" and math.isclose(a, interval_end, rel_tol=0, abs_tol=_TOUCH * max(1.0, a)):
            return li
        if side == "right" and math.isclose(b, interval_end, rel_tol=0, abs_tol=_TOUCH * max(1.0, b)):
            return ri
    raise ValueError(f"{interval_end!r} is not a {side} end of any degeneracy interval")
