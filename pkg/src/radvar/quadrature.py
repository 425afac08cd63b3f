"""Singularity-aware 1-D quadrature for the radial integrals of the toolkit.

Everything in the package is reduced to integrals in the radius ``r``.  Three
kinds of rules live here:

* closed-form power integrals (``power_integral``), stable for exponents close
  to the critical value 1;
* adaptive quadrature with a logarithmic change of variables toward singular
  endpoints (``graded_quad``), backed by QUADPACK through scipy;
* a composite Gauss-Legendre rule with geometric grading toward interval ends
  (``composite_rule``), used for the vectorised weighted ``L^p`` integrals.

The module-level operations ``integrate_inverse_kernel``, ``integrate_energy``
and ``integrate_fidelity`` take weight specs, profiles and auxiliary weights
by duck typing, so this module imports nothing else from the package.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate


class ToleranceNotMet(RuntimeError):
    """Adaptive quadrature exhausted its budget without reaching tolerance."""


class DomainMismatch(ValueError):
    """A profile does not cover the interval it is integrated over."""


class AnalysisInconclusive(RuntimeError):
    """Refinement could not separate integrable from divergent behaviour."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 40
    # exponent of the graded solver meshes near interval ends
    endpoint_grading: float = 2.0
    gauss_order: int = 8
    # geometric ratio of the composite rule toward interval ends
    grading_ratio: float = 0.25
    # False forces adaptive quadrature even where an antiderivative is known
    closed_forms: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.endpoint_grading < 1:
            raise ValueError("endpoint_grading must be >= 1")
        if not 0 < self.grading_ratio < 1:
            raise ValueError("grading_ratio must lie in (0, 1)")


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# closed forms


def power_integral(x, y, beta):
    """Return the integral of ``s**(-beta)`` over ``[x, y]`` with ``0 <= x <= y``.

    Written through ``expm1``/``log`` so that exponents near 1 do not cancel.
    Returns ``inf`` when ``x == 0 < y`` and ``beta >= 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    out = np.zeros(x.shape)
    live = y > x
    if not np.any(live):
        return out if out.ndim else float(out)
    xs, ys = x[live], y[live]
    e = 1.0 - beta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio_log = np.log(xs / ys)
        if abs(e) < 1e-300:
            val = -ratio_log
        else:
            val = np.power(ys, e) * (-np.expm1(e * ratio_log)) / e
    out[live] = val
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# adaptive quadrature


def _quad(f, lo, hi, config: QuadratureConfig):
    limit = max(50, 5 * config.max_depth)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(
            f, lo, hi, epsabs=config.abs_tol, epsrel=config.rel_tol, limit=limit, full_output=1
        )
    val, err = res[0], res[1]
    if len(res) > 3 and not err <= 10.0 * max(config.abs_tol, math.sqrt(config.rel_tol) * abs(val)):
        raise ToleranceNotMet(
            f"quadrature on [{lo!r}, {hi!r}] stopped at error {err:.3e} for value {val:.6e}"
        )
    return val


def graded_quad(
    f: Callable[[float], float],
    x: float,
    y: float,
    left_singular: float | None = None,
    right_singular: float | None = None,
    config: QuadratureConfig = DEFAULT_CONFIG,
    offset_f: Callable[[float], float] | None = None,
) -> float:
    """Integrate ``f`` over ``[x, y]`` with log-grading toward singular points.

    ``left_singular <= x`` and ``right_singular >= y`` mark points where ``f``
    may blow up algebraically; the substitution ``s = z +/- exp(u)`` turns a
    power singularity into an exponential, which QUADPACK resolves quickly.

    With a single singular end, ``offset_f(t)`` may supply ``f(z +/- t)``
    directly.  Near ``z != 0`` the sum ``z + t`` loses the low bits of ``t``,
    which matters when ``f`` depends on the distance to ``z``.
    """
    if not y > x:
        return 0.0
    if left_singular is not None and right_singular is not None:
        m = 0.5 * (x + y)
        return graded_quad(f, x, m, left_singular, None, config) + graded_quad(
            f, m, y, None, right_singular, config
        )
    if left_singular is not None:
        z = left_singular

        def g(u):
            t = math.exp(u)
            if offset_f is not None:
                return offset_f(t) * t if t > 0 else 0.0
            s = z + t
            if s == z:
                return 0.0
            return f(s) * t

        ulo = math.log(x - z) if x > z else -math.inf
        return _quad(g, ulo, math.log(y - z), config)
    if right_singular is not None:
        z = right_singular

        def g(u):
            t = math.exp(u)
            if offset_f is not None:
                return offset_f(t) * t if t > 0 else 0.0
            s = z - t
            if s == z:
                return 0.0
            return f(s) * t

        ulo = math.log(z - y) if z > y else -math.inf
        return _quad(g, ulo, math.log(z - x), config)
    return _quad(f, x, y, config)


# ---------------------------------------------------------------------------
# divergence detection


def endpoint_exponent(
    integral: Callable[[float, float], float],
    z: float,
    direction: int,
    span: float,
    shrink: float = 1e-2,
    refinements: int = 3,
) -> float:
    """Estimate ``beta`` in ``f(s) ~ |s - z|**(-beta)`` from refined integrals.

    ``integral(lo, hi)`` integrates the candidate integrand.  Windows
    ``[h_{k+1}, h_k]`` with ``h_k = span * shrink**k`` are integrated for
    ``refinements + 1`` scales; for a pure power the ratio of successive window
    integrals is exactly ``shrink**(1 - beta)``.  Returns ``-inf`` when the
    integrand vanishes identically near ``z``.
    """
    h = span * shrink ** np.arange(refinements + 1)
    incs = []
    for k in range(refinements):
        p, q = z + direction * h[k + 1], z + direction * h[k]
        incs.append(integral(min(p, q), max(p, q)))
    incs = np.asarray(incs, dtype=float)
    if np.all(incs == 0.0):
        return -math.inf
    if not np.all(np.isfinite(incs)) or np.any(incs <= 0.0):
        raise AnalysisInconclusive(f"window integrals near {z!r} are not positive/finite: {incs}")
    betas = 1.0 - np.log(incs[1:] / incs[:-1]) / math.log(shrink)
    if np.ptp(betas) > 0.05:
        raise AnalysisInconclusive(f"exponent estimates near {z!r} disagree: {betas}")
    return float(betas[-1])


def is_integrable_exponent(beta: float, band: float = 1e-3, critical: float = 1e-6) -> bool:
    """Decide integrability of ``|s - z|**(-beta)`` from a numerical estimate.

    Estimates within ``critical`` of 1 are the logarithmic (divergent) case;
    estimates in ``(1 - band, 1 - critical)`` cannot be told apart.
    """
    if beta < 1.0 - band:
        return True
    if beta >= 1.0 - critical:
        return False
    raise AnalysisInconclusive(f"exponent estimate {beta:.8f} is too close to 1")


# ---------------------------------------------------------------------------
# composite Gauss-Legendre rules


@lru_cache(maxsize=None)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def composite_rule(
    a: float,
    b: float,
    breakpoints: Sequence[float] = (),
    order: int = 8,
    levels: int = 40,
    ratio: float = 0.25,
    refine: int = 1,
    graded: Sequence[float] = (),
    graded_levels: int = 20,
):
    """Nodes and weights of a graded composite Gauss rule on ``[a, b]``.

    Segments between breakpoints get ``order`` Gauss points, split into
    ``refine`` equal parts.  The segments touching ``a`` and ``b`` are further
    cut geometrically (``levels`` cuts of ratio ``ratio``) so that bounded
    integrands with power-type behaviour at the ends converge.  Points listed
    in ``graded`` become breakpoints with ``graded_levels`` cuts on each side,
    for interior kinks such as ``|x - c|**p``.
    """
    if not b > a:
        return np.empty(0), np.empty(0)
    gp = np.asarray(graded, dtype=float)
    gp = gp[(gp > a) & (gp < b)]
    bp = np.asarray(breakpoints, dtype=float)
    bp = bp[(bp > a) & (bp < b)]
    pts = np.unique(np.concatenate([[a, b], bp, gp]))
    if pts.size == 2:
        pts = np.array([a, 0.5 * (a + b), b])
    geo = ratio ** np.arange(1, levels + 1)
    x0, x1 = pts[0], pts[1]
    y0, y1 = pts[-2], pts[-1]
    left = x0 + (x1 - x0) * geo
    right = y1 - (y1 - y0) * geo
    cuts = [pts, left[left > x0], right[right < y1]]
    if gp.size:
        k = np.searchsorted(pts, np.unique(gp))
        g = pts[k][:, None]
        geo_g = ratio ** np.arange(1, graded_levels + 1)[None, :]
        cuts.append((g + (pts[k + 1][:, None] - g) * geo_g).ravel())
        cuts.append((g - (g - pts[k - 1][:, None]) * geo_g).ravel())
    edges = np.unique(np.concatenate(cuts))
    if refine > 1:
        frac = np.arange(refine) / refine
        lo, hi = edges[:-1], edges[1:]
        edges = np.append((lo[:, None] + (hi - lo)[:, None] * frac[None, :]).ravel(), edges[-1])
    xg, wg = _gauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


# ---------------------------------------------------------------------------
# toolkit-level integrals


def integrate_inverse_kernel(spec, params, r_lo: float, r_hi: float, config: QuadratureConfig | None = None):
    """Integral of ``(s**(d-1) * eta(s))**(-1/(p-1))`` over ``[r_lo, r_hi]``.

    Exact for constant and compensated power-bump pieces; adaptive otherwise.
    ``inf`` when the range reaches a non-integrable endpoint or a zero set.
    """
    from .weight_model import kernel_model

    if np.any(np.asarray(r_hi) < np.asarray(r_lo)):
        raise ValueError("r_hi must be >= r_lo")
    return kernel_model(spec, params, config or DEFAULT_CONFIG).integral(r_lo, r_hi)


def integrate_energy(profile, spec, params, interval, config: QuadratureConfig | None = None) -> float:
    """``omega_d * int r**(d-1) |v'|**p eta dr`` over ``interval``.

    This is the d-dimensional ``int |grad u|**p w dx`` of ``u(x) = v(|x|)``.
    """
    from .weight_model import kernel_model

    lo, hi = interval
    if not profile.covers(lo, hi):
        raise DomainMismatch(f"profile does not cover [{lo}, {hi}]")
    config = config or DEFAULT_CONFIG
    model = kernel_model(spec, params, config)
    return params.omega_d * profile.weighted_energy(model, params.p, lo, hi, config)


def integrate_fidelity(
    profile,
    datum,
    aux,
    params,
    config: QuadratureConfig | None = None,
    refine: int = 1,
) -> float:
    """``L^p(Omega, w_hat**(p-1))`` norm of ``u - g`` after radial reduction.

    Equals ``(omega_d * int r**(d-1) |v - g|**p (eta_hat / omega_d)**(p-1) dr)**(1/p)``
    over the union of the degeneracy intervals.
    """
    config = config or DEFAULT_CONFIG
    total = 0.0
    p = params.p
    for band in aux.bands:
        lo, hi = band.a, band.b
        for prof in (profile, datum):
            if not prof.covers(lo, hi):
                raise DomainMismatch(f"profile does not cover [{lo}, {hi}]")
        bps = np.concatenate(
            [aux.breakpoints(lo, hi), profile.breakpoints_in(lo, hi), datum.breakpoints_in(lo, hi)]
        )
        r, w = composite_rule(lo, hi, bps, config.gauss_order, ratio=config.grading_ratio, refine=refine)
        diff = np.abs(profile.value(r) - datum.value(r))
        weight = w * r ** (params.d - 1) * aux.w_hat(r) ** (p - 1)
        with np.errstate(invalid="ignore", over="ignore"):
            terms = np.where(weight > 0.0, weight * diff**p, 0.0)
        total += params.omega_d * float(np.sum(terms))
    return total ** (1.0 / p)
