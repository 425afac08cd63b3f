"""Pointwise oscillation bounds and the double-weight Poincare inequality.

All quantities are radial reductions of d-dimensional integrals: ``dy`` over
the shell ``s < |y| < t`` becomes ``omega_d * r**(d-1) dr``.  For interval
``i`` with midpoint ``c`` the two sides of the interval-wise inequality are

    lhs_i = omega_d / (b - a) * int_a^b r**(d-1) |v - v(c)|**p eta_hat**(p-1) dr
    rhs_i = omega_d * int_a^b r**(d-1) |v'|**p eta dr

``rhs_i`` is exact for piecewise-linear profiles (cell moments of the weight);
``lhs_i`` uses a graded composite Gauss rule, and its discretisation error is
estimated by comparing against the rule refined twice.

The argument that integrates the pointwise bound over ``zeta`` gives
``lhs_i <= rhs_i`` whenever both half-interval volumes
``int r**(d-1) dr`` are at most ``b - a``; this always holds for ``d = 1`` and
for annuli of radius at most about 1.  ``PoincareReport.proof_condition``
records it per interval, because far from the origin the inequality can fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .aux_weight import AuxBand, AuxWeight
from .profiles import NotInDomain
from .quadrature import (
    DEFAULT_CONFIG,
    AnalysisInconclusive,
    QuadratureConfig,
    ToleranceNotMet,
    composite_rule,
    endpoint_exponent,
    graded_quad,
    integrate_energy,
    is_integrable_exponent,
)
from .weight_model import ProblemParams, RadialWeightSpec

__all__ = [
    "OrderingViolated",
    "PoincareReport",
    "PointwiseReport",
    "check_pointwise",
    "check_poincare",
    "endpoint_decay",
    "interval_energies",
    "lp_aux_norm",
    "w_norm",
]

REL_SLACK = 1e-9


class OrderingViolated(ValueError):
    """``zeta`` and ``x`` are not ordered as the pointwise bound requires."""


def _violates(lhs: float, rhs: float, rel: float = REL_SLACK) -> bool:
    return lhs > rhs + rel * max(abs(rhs), abs(lhs))


@dataclass(frozen=True)
class PointwiseReport:
    side: Literal["left", "right"]
    zeta: float
    x: float
    # oscillation bound: |v(x) - v(zeta)| omega_d w_hat(zeta)**(1/p')  vs  energy**(1/p)
    osc_lhs: float
    osc_rhs: float
    # value bound: |v(zeta)|**p w_hat**(p-1) omega_d**p  vs  2**(p-1) (... + energy to the end)
    value_lhs: float
    value_rhs: float

    @property
    def osc_slack(self) -> float:
        return self.osc_rhs - self.osc_lhs

    @property
    def value_slack(self) -> float:
        return self.value_rhs - self.value_lhs

    @property
    def satisfied(self) -> bool:
        return not (_violates(self.osc_lhs, self.osc_rhs) or _violates(self.value_lhs, self.value_rhs))


def check_pointwise(
    profile,
    aux: AuxWeight,
    spec: RadialWeightSpec,
    params: ProblemParams,
    zeta: float,
    x: float,
    i: int,
    config: QuadratureConfig | None = None,
) -> PointwiseReport:
    """Both pointwise bounds on interval ``i`` (0-based).

    Left form: ``a_i < zeta <= x <= mid``; right form: ``mid <= x <= zeta < b_i``.
    """
    band = aux.bands[i]
    a, b, mid = band.a, band.b, band.mid
    if a < zeta <= x <= mid:
        side, osc_range, end_range = "left", (zeta, x), (a, x)
    elif mid <= x <= zeta < b:
        side, osc_range, end_range = "right", (x, zeta), (x, b)
    else:
        raise OrderingViolated(
            f"need a < zeta <= x <= mid or mid <= x <= zeta < b on ({a}, {b}); got zeta={zeta}, x={x}"
        )
    p, om = params.p, params.omega_d
    what = float(aux.w_hat(zeta))
    e_osc = integrate_energy(profile, spec, params, osc_range, config)
    e_end = integrate_energy(profile, spec, params, end_range, config)
    vz, vx = float(profile.value(zeta)), float(profile.value(x))
    osc_lhs = abs(vx - vz) * om * what ** (1.0 / params.p_conj)
    osc_rhs = e_osc ** (1.0 / p)
    scale = what ** (p - 1) * om**p
    value_lhs = abs(vz) ** p * scale
    value_rhs = 2.0 ** (p - 1) * (abs(vx) ** p * scale + e_end)
    return PointwiseReport(side, float(zeta), float(x), float(osc_lhs), float(osc_rhs), float(value_lhs), float(value_rhs))


# ---------------------------------------------------------------------------
# weighted L^p integrals against eta_hat


def _band_integral(band: AuxBand, aux: AuxWeight, params: ProblemParams, f, breakpoints, refine: int, config, kinks=()):
    """``omega_d * int r**(d-1) f(r) (eta_hat/omega_d)**(p-1) dr`` over one interval.

    ``kinks`` are zeros of ``f`` where it behaves like ``|x|**p``; the rule is graded there.
    """
    bps = np.concatenate([aux.breakpoints(band.a, band.b), np.asarray(breakpoints, dtype=float)])
    r, w = composite_rule(
        band.a, band.b, bps, config.gauss_order, ratio=config.grading_ratio, refine=refine, graded=kinks
    )
    weight = w * r ** (params.d - 1) * band.eval(r) ** (params.p - 1)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = f(r)
        terms = np.where(weight > 0.0, weight * vals, 0.0)
    return params.omega_d ** (2 - params.p) * float(np.sum(terms))


def _diverges_at_end(profile, band: AuxBand, params: ProblemParams, config) -> bool:
    """Whether ``r**(d-1) |v|**p eta_hat**(p-1)`` fails to be integrable at a singular end of ``profile``."""
    singular = getattr(profile, "singular", ())
    c0, c1 = getattr(profile, "active", (band.a, band.b))
    p, d = params.p, params.d

    def f(r):
        return r ** (d - 1) * abs(float(profile.value(r))) ** p * float(band.eval(r)) ** (p - 1)

    for z, direction in ((band.a, 1), (band.b, -1)):
        # clipping freezes v before the end, so it stays bounded there
        if z not in singular or not c0 <= z <= c1:
            continue
        span = 1e-3 * (band.b - band.a)
        try:
            beta = endpoint_exponent(lambda x, y: graded_quad(f, x, y, config=config), z, direction, span)
            if not is_integrable_exponent(beta):
                return True
        except ToleranceNotMet:
            return True
        except AnalysisInconclusive:
            # log-type factors spread the estimates; the quadrature value stands
            continue
    return False


def lp_aux_norm(profile, aux: AuxWeight, params: ProblemParams, config: QuadratureConfig | None = None, refine: int = 1) -> float:
    """``||u||`` in ``L^p(I, w_hat**(p-1))`` over the union of the intervals."""
    config = config or DEFAULT_CONFIG
    p = params.p
    total = 0.0
    for band in aux.bands:
        if _diverges_at_end(profile, band, params, config):
            return math.inf
        bps = profile.breakpoints_in(band.a, band.b)
        kinks = profile.crossings(0.0, band.a, band.b)
        total += _band_integral(band, aux, params, lambda r: np.abs(profile.value(r)) ** p, bps, refine, config, kinks)
    return total ** (1.0 / p)


def interval_energies(profile, spec: RadialWeightSpec, params: ProblemParams, aux: AuxWeight, config=None) -> list[float]:
    return [integrate_energy(profile, spec, params, (band.a, band.b), config) for band in aux.bands]


# ---------------------------------------------------------------------------
# Poincare


@dataclass(frozen=True)
class PoincareReport:
    midpoints: tuple
    anchors: tuple
    lhs: tuple
    rhs: tuple
    # |lhs(2L) - lhs(L)| for the composite rule refined L = 1, 2
    lhs_error: tuple
    lhs_error_refined: tuple
    proof_condition: tuple
    rel_slack: float = REL_SLACK

    @property
    def margins(self) -> tuple:
        return tuple(r - l for l, r in zip(self.lhs, self.rhs))

    @property
    def lhs_total(self) -> float:
        return float(sum(self.lhs))

    @property
    def rhs_total(self) -> float:
        return float(sum(self.rhs))

    @property
    def total_holds(self) -> bool:
        return self.lhs_total <= self.rhs_total + self.rel_slack * (1.0 + self.rhs_total)

    @property
    def intervalwise_holds(self) -> tuple:
        return tuple(not _violates(l, r, self.rel_slack) for l, r in zip(self.lhs, self.rhs))

    @property
    def refinement_shrinks(self) -> bool:
        """The error estimate does not grow when the rule is refined (up to roundoff)."""
        ok = True
        for e1, e2, l in zip(self.lhs_error, self.lhs_error_refined, self.lhs):
            floor = 1e-13 * max(1.0, abs(l))
            ok &= e2 <= max(e1, floor)
        return bool(ok)

    def csv_rows(self):
        for k in range(len(self.lhs)):
            yield {
                "i": k + 1,
                "c_i": self.midpoints[k],
                "v_c_i": self.anchors[k],
                "lhs_i": self.lhs[k],
                "rhs_i": self.rhs[k],
                "margin_i": self.margins[k],
                "lhs_error_i": self.lhs_error_refined[k],
                "proof_condition_i": self.proof_condition[k],
            }


def _proof_condition(a: float, b: float, d: int) -> bool:
    mid = 0.5 * (a + b)
    vol_l = (mid**d - a**d) / d
    vol_r = (b**d - mid**d) / d
    return max(vol_l, vol_r) <= (b - a) * (1 + 1e-12)


def check_poincare(
    profile,
    aux: AuxWeight,
    spec: RadialWeightSpec,
    params: ProblemParams,
    config: QuadratureConfig | None = None,
) -> PoincareReport:
    config = config or DEFAULT_CONFIG
    p, om = params.p, params.omega_d
    mids, anchors, lhs, rhs, err1, err2, cond = [], [], [], [], [], [], []
    for k, band in enumerate(aux.bands):
        energy = integrate_energy(profile, spec, params, (band.a, band.b), config)
        if not math.isfinite(energy):
            raise NotInDomain(f"infinite energy on interval {k + 1} ({band.a}, {band.b})", interval=k)
        c = band.mid
        vc = float(profile.value(c))
        bps = profile.breakpoints_in(band.a, band.b)
        # v - v(c) vanishes at c itself; drop the rounded copy of c among the crossings
        cross = profile.crossings(vc, band.a, band.b)
        kinks = np.append(cross[np.abs(cross - c) > 1e-12 * (band.b - band.a)], c)
        f = lambda r: np.abs(profile.value(r) - vc) ** p
        # (omega^(p-1)/(b-a)) * omega * int r^(d-1)|v-v(c)|^p (eta_hat/omega)^(p-1)
        scale = om ** (p - 1) / (band.b - band.a)
        vals = [scale * _band_integral(band, aux, params, f, bps, L, config, kinks) for L in (1, 2, 4)]
        mids.append(c)
        anchors.append(vc)
        lhs.append(float(vals[-1]))
        rhs.append(float(energy))
        err1.append(float(abs(vals[1] - vals[0])))
        err2.append(float(abs(vals[2] - vals[1])))
        cond.append(_proof_condition(band.a, band.b, params.d))
    return PoincareReport(tuple(mids), tuple(anchors), tuple(lhs), tuple(rhs), tuple(err1), tuple(err2), tuple(cond))


def w_norm(profile, aux: AuxWeight, spec: RadialWeightSpec, params: ProblemParams, config: QuadratureConfig | None = None) -> float:
    """``(||u||^p in L^p(w_hat**(p-1)) + ||grad u||^p in L^p(w))**(1/p)``."""
    energies = interval_energies(profile, spec, params, aux, config)
    for k, e in enumerate(energies):
        if not math.isfinite(e):
            raise NotInDomain(f"infinite energy on interval {k + 1}", interval=k)
    p = params.p
    lp = lp_aux_norm(profile, aux, params, config)
    return (lp**p + sum(energies)) ** (1.0 / p)


def endpoint_decay(profile, aux: AuxWeight, params: ProblemParams, i: int, side: Literal["left", "right"], n: int = 12, ratio: float = 0.25):
    """``|v(r)|**p * eta_hat(r)**(p-1)`` at ``r_k = end +/- h * ratio**k``.

    Returns ``(radii, values)``; at a vanishing-limit end the values tend to 0.
    """
    band = aux.bands[i]
    h = 0.25 * (band.b - band.a)
    steps = h * ratio ** np.arange(n)
    r = band.a + steps if side == "left" else band.b - steps
    vals = np.abs(profile.value(r)) ** params.p * band.eval(r) ** (params.p - 1)
    return r, vals
