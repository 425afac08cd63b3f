"""Minimisation of ``H(u) = F(u) + ||u - g||`` over radial profiles.

The functional decouples into 1-D problems on the degeneracy intervals, tied
together only through the outer ``1/p`` power of the fidelity norm.  Each
interval gets a graded grid, profiles are continuous and piecewise linear on
it, and the discrete objective is

    H(v) = omega_d * sum_c M_c |dv_c / h_c|**p  +  (sum_q W_q |(Bv)_q - g_q|**p)**(1/p)

with exact cell moments ``M_c = int_c r**(d-1) eta``, Gauss nodes ``q`` in each
cell, ``W_q = omega_d w_q r_q**(d-1) (eta_hat(r_q)/omega_d)**(p-1)`` and ``B``
the linear interpolation from nodes to Gauss points.

``minimize_H`` runs a damped Newton method on a smoothed objective with a
continuation in the smoothing parameter ``eps``: the norm becomes
``sqrt(N**2 + eps**2)`` and, for ``p < 2``, ``|s|**p`` becomes
``(s**2 + eps**2)**(p/2)``.  The Hessian is tridiagonal plus a rank-one term
from the outer norm.  ``oracle_minimize`` minimises the same unsmoothed
objective by cyclic coordinate descent with golden-section line searches and
shares no code with the Newton path beyond the objective itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .aux_weight import AuxWeight
from .poincare import lp_aux_norm
from .profiles import RadialProfile
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, _gauss, integrate_energy, integrate_fidelity
from .relaxation import EnergyBreakdown
from .weight_model import ProblemParams, RadialWeightSpec, kernel_model

__all__ = [
    "CompetitorNotInDomain",
    "DatumNotIntegrable",
    "DiscreteProblem",
    "DominanceReport",
    "MinimizerResult",
    "NonConvergence",
    "PolarCompetitor",
    "SolverConfig",
    "evaluate_H",
    "minimize_H",
    "oracle_minimize",
    "radial_dominance_check",
]

P_GUARD = 1.0 + 1e-6


class DatumNotIntegrable(ValueError):
    """The datum has infinite norm in ``L^p(w_hat**(p-1))``."""


class NonConvergence(RuntimeError):
    def __init__(self, message: str, result: "MinimizerResult | None" = None):
        super().__init__(message)
        self.result = result


class CompetitorNotInDomain(ValueError):
    """A polar competitor has non-finite values or energy."""


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 257
    eps_start: float = 1e-2
    eps_end: float = 1e-10
    eps_factor: float = 0.1
    grad_tol: float = 1e-9
    max_iters: int = 10000
    gauss_order: int = 4
    # exponent of the mesh grading toward interval ends; None uses the quadrature config
    grading: float | None = None
    certificate_samples: int = 32

    def __post_init__(self):
        if self.grid_size < 3:
            raise ValueError("grid_size must be >= 3")
        if not (self.eps_start >= self.eps_end >= 1e-12):
            raise ValueError("need eps_start >= eps_end >= 1e-12")
        if not 0 < self.eps_factor < 1:
            raise ValueError("eps_factor must lie in (0, 1)")
        if self.grad_tol <= 0 or self.max_iters < 1:
            raise ValueError("grad_tol and max_iters must be positive")

    @property
    def eps_sequence(self) -> list[float]:
        seq, eps = [], self.eps_start
        while eps > self.eps_end * (1 + 1e-9):
            seq.append(eps)
            eps *= self.eps_factor
        seq.append(self.eps_end)
        return seq


def graded_nodes(a: float, b: float, n_cells: int, grading: float) -> np.ndarray:
    """Nodes symmetric about the midpoint, clustered as ``s**grading`` toward both ends."""
    s = np.linspace(0.0, 1.0, n_cells + 1)
    phi = np.where(s <= 0.5, 0.5 * (2 * s) ** grading, 1.0 - 0.5 * (2 * (1 - s)) ** grading)
    x = a + (b - a) * phi
    x[0], x[-1] = a, b
    return x


# ---------------------------------------------------------------------------
# discrete objective


@dataclass(frozen=True)
class _Block:
    a: float
    b: float
    nodes: np.ndarray
    offset: int

    @property
    def size(self) -> int:
        return self.nodes.size


class DiscreteProblem:
    """The discrete ``H`` for datum ``g`` on per-interval graded grids."""

    def __init__(
        self,
        g,
        spec: RadialWeightSpec,
        params: ProblemParams,
        aux: AuxWeight,
        grid_size: int = 257,
        grading: float | None = None,
        gauss_order: int = 4,
        config: QuadratureConfig | None = None,
    ):
        if params.p < P_GUARD:
            raise ValueError(f"p must be at least {P_GUARD}")
        config = config or DEFAULT_CONFIG
        self.g, self.spec, self.params, self.aux = g, spec, params, aux
        self.config = config
        grading = config.endpoint_grading if grading is None else grading
        om, p, d = params.omega_d, params.p, params.d
        model = kernel_model(spec, params, config)
        blocks, offset = [], 0
        for band in aux.bands:
            x = graded_nodes(band.a, band.b, grid_size - 1, grading)
            blocks.append(_Block(band.a, band.b, x, offset))
            offset += x.size
        self.blocks = tuple(blocks)
        self.n = offset
        # energy cells: global node pairs (i0, i0 + 1)
        i0, h, mom = [], [], []
        for blk in blocks:
            x = blk.nodes
            i0.append(blk.offset + np.arange(x.size - 1))
            h.append(np.diff(x))
            mom.append(model.moment(x[:-1], x[1:]))
        self.cell_i0 = np.concatenate(i0) if i0 else np.zeros(0, int)
        self.cell_h = np.concatenate(h) if h else np.zeros(0)
        self.cell_m = om * np.concatenate(mom) if mom else np.zeros(0)
        # fidelity Gauss points
        xg, wg = _gauss(gauss_order)
        lo = np.concatenate([blk.nodes[:-1] for blk in blocks]) if blocks else np.zeros(0)
        hh = self.cell_h
        t = 0.5 * (xg + 1.0)
        r = (lo[:, None] + hh[:, None] * t[None, :]).ravel()
        w = (0.5 * hh[:, None] * wg[None, :]).ravel()
        self.q_i0 = np.repeat(self.cell_i0, gauss_order)
        self.q_t = np.tile(t, lo.size)
        self.q_r = r
        self.q_w = om * w * r ** (d - 1) * (aux.eval(r) / om) ** (p - 1) if r.size else r
        self.q_g = np.asarray(g.value(r), dtype=float) if r.size else r
        self.gauss_order = gauss_order

    # -- structure --------------------------------------------------------

    @cached_property
    def radii(self) -> np.ndarray:
        return np.concatenate([blk.nodes for blk in self.blocks]) if self.blocks else np.zeros(0)

    def block_slices(self):
        return [slice(blk.offset, blk.offset + blk.size) for blk in self.blocks]

    def interp(self, v):
        v0 = v[self.q_i0]
        return v0 + self.q_t * (v[self.q_i0 + 1] - v0)

    def slopes(self, v):
        return (v[self.cell_i0 + 1] - v[self.cell_i0]) / self.cell_h

    # -- unsmoothed objective ---------------------------------------------

    def energies(self, v) -> list[float]:
        p = self.params.p
        terms = self.cell_m * np.abs(self.slopes(v)) ** p
        out = []
        for k, blk in enumerate(self.blocks):
            lo = blk.offset - k
            out.append(float(np.sum(terms[lo : lo + blk.size - 1])))
        return out

    def energy(self, v) -> float:
        return float(np.sum(self.cell_m * np.abs(self.slopes(v)) ** self.params.p))

    def fidelity_power(self, v) -> float:
        return float(np.sum(self.q_w * np.abs(self.interp(v) - self.q_g) ** self.params.p))

    def value(self, v) -> float:
        return self.energy(v) + self.fidelity_power(v) ** (1.0 / self.params.p)

    @cached_property
    def _node_cells(self):
        """Per node: the cell ending at it and the cell starting at it (-1 if none)."""
        left, right = np.full(self.n, -1), np.full(self.n, -1)
        k = np.arange(self.cell_i0.size)
        left[self.cell_i0 + 1] = k
        right[self.cell_i0] = k
        return left, right

    def node_slope(self, v, i: int, x: float, g1: float) -> tuple[float, float]:
        """Unsmoothed partial derivative in node ``i`` at value ``x`` and the sum of its term sizes.

        ``g1`` is the derivative of the outer root at the current fidelity
        power.  Only the two neighbouring cells enter, so the result keeps its
        relative accuracy however small the local weights are.
        """
        p, G = self.params.p, self.gauss_order
        left, right = self._node_cells
        total, size = 0.0, 0.0
        for k, is_right_end in ((left[i], True), (right[i], False)):
            if k < 0:
                continue
            j = self.cell_i0[k]
            a, b = (v[j], x) if is_right_end else (x, v[j + 1])
            h = self.cell_h[k]
            s = (b - a) / h
            de = self.cell_m[k] * p * math.copysign(abs(s) ** (p - 1), s) / h
            sl = slice(k * G, (k + 1) * G)
            t = self.q_t[sl]
            e = a + t * (b - a) - self.q_g[sl]
            share = t if is_right_end else 1.0 - t
            dq = g1 * self.q_w[sl] * p * np.sign(e) * np.abs(e) ** (p - 1) * share
            total += (de if is_right_end else -de) + float(np.sum(dq))
            size += abs(de) + float(np.sum(np.abs(dq)))
        return total, size

    # -- smoothed objective with derivatives --------------------------------

    def _pow(self, x, eps, smooth):
        p = self.params.p
        if smooth:
            q = x * x + eps * eps
            f = q ** (0.5 * p)
            d1 = p * x * q ** (0.5 * p - 1)
            d2 = p * q ** (0.5 * p - 2) * ((p - 1) * x * x + eps * eps)
        else:
            ax = np.abs(x)
            f = ax**p
            d1 = p * np.sign(x) * ax ** (p - 1)
            d2 = p * (p - 1) * ax ** (p - 2) if p != 2 else np.full_like(x, 2.0)
        return f, d1, d2

    def smoothed(self, v, eps: float, hessian: bool = True):
        """Value, gradient and (tridiagonal bands, rank-one vector, coefficient)."""
        p, n = self.params.p, self.n
        smooth = p < 2
        s = self.slopes(v)
        f_e, d1_e, d2_e = self._pow(s, eps, smooth)
        energy = float(np.sum(self.cell_m * f_e))
        ge = self.cell_m * d1_e / self.cell_h
        grad = np.zeros(n)
        np.add.at(grad, self.cell_i0 + 1, ge)
        np.add.at(grad, self.cell_i0, -ge)

        e = self.interp(v) - self.q_g
        f_q, d1_q, d2_q = self._pow(e, eps, smooth)
        phi = float(np.sum(self.q_w * f_q))
        gq = self.q_w * d1_q
        gphi = np.zeros(n)
        np.add.at(gphi, self.q_i0, gq * (1.0 - self.q_t))
        np.add.at(gphi, self.q_i0 + 1, gq * self.q_t)

        A = phi ** (2.0 / p) if phi > 0 else 0.0
        G = math.sqrt(A + eps * eps)
        if phi > 0:
            dA = (2.0 / p) * phi ** (2.0 / p - 1.0)
            d2A = (2.0 / p) * (2.0 / p - 1.0) * phi ** (2.0 / p - 2.0)
        else:
            dA = d2A = 0.0
        G1 = dA / (2.0 * G)
        G2 = d2A / (2.0 * G) - dA * dA / (4.0 * G**3)
        val = energy + G
        grad = grad + G1 * gphi
        if not hessian:
            return val, grad, None
        main = np.zeros(n)
        off = np.zeros(max(n - 1, 0))
        he = self.cell_m * d2_e / self.cell_h**2
        np.add.at(main, self.cell_i0, he)
        np.add.at(main, self.cell_i0 + 1, he)
        np.add.at(off, self.cell_i0, -he)
        hq = G1 * self.q_w * d2_q
        t0, t1 = 1.0 - self.q_t, self.q_t
        np.add.at(main, self.q_i0, hq * t0 * t0)
        np.add.at(main, self.q_i0 + 1, hq * t1 * t1)
        np.add.at(off, self.q_i0, hq * t0 * t1)
        return val, grad, (main, off, gphi, G2)

    def gradient_scale(self, v, eps: float) -> np.ndarray:
        """Per node, the sum of the absolute values of the terms in the smoothed gradient."""
        p = self.params.p
        smooth = p < 2
        _, d1_e, _ = self._pow(self.slopes(v), eps, smooth)
        ge = np.abs(self.cell_m * d1_e / self.cell_h)
        out = np.zeros(self.n)
        np.add.at(out, self.cell_i0, ge)
        np.add.at(out, self.cell_i0 + 1, ge)
        f_q, d1_q, _ = self._pow(self.interp(v) - self.q_g, eps, smooth)
        phi = float(np.sum(self.q_w * f_q))
        if phi > 0:
            G1 = (1.0 / p) * phi ** (2.0 / p - 1.0) / math.sqrt(phi ** (2.0 / p) + eps * eps)
            gq = G1 * np.abs(self.q_w * d1_q)
            np.add.at(out, self.q_i0, gq * (1.0 - self.q_t))
            np.add.at(out, self.q_i0 + 1, gq * self.q_t)
        return out

    # -- profiles ---------------------------------------------------------

    def initial(self, kind="datum", rng: np.random.Generator | None = None) -> np.ndarray:
        r = self.radii
        gr = np.asarray(self.g.value(r), dtype=float)
        if isinstance(kind, np.ndarray):
            return np.asarray(kind, dtype=float).copy()
        if kind == "datum":
            return gr
        if kind == "zero":
            return np.zeros(self.n)
        if kind == "mean":
            out = np.empty(self.n)
            for sl in self.block_slices():
                out[sl] = np.mean(gr[sl])
            return out
        if kind == "random":
            rng = rng or np.random.default_rng(0)
            scale = 1.0 + np.max(np.abs(gr), initial=0.0)
            return gr + scale * rng.uniform(-1.0, 1.0, self.n)
        raise ValueError(f"unknown initialisation {kind!r}")

    def to_profile(self, v) -> RadialProfile:
        """Nodal values inside the intervals, the datum ``g`` everywhere else.

        Where an interval meets the datum region (or another interval) with a
        different value, the radius is stored twice.
        """
        g = self.g
        gx = np.asarray(getattr(g, "grid", []), dtype=float)
        left_val = getattr(g, "value_left", g.value)
        segments = []

        def gap(lo, hi):
            if hi > lo:
                pts = np.concatenate([[lo], gx[(gx > lo) & (gx < hi)], [hi]])
                vals = np.asarray(g.value(pts), dtype=float)
                vals[-1] = left_val(hi)
                segments.append((pts, vals))

        cursor = min(self.params.a, self.blocks[0].a) if self.blocks else self.params.a
        for blk, sl in zip(self.blocks, self.block_slices()):
            gap(cursor, blk.a)
            segments.append((blk.nodes, np.asarray(v[sl], dtype=float)))
            cursor = blk.b
        gap(cursor, max(self.params.b, cursor))
        if not segments:
            gap(self.params.a, self.params.b)
        grid, vals = list(segments[0][0]), list(segments[0][1])
        for pts, vv in segments[1:]:
            if vv[0] == vals[-1]:
                pts, vv = pts[1:], vv[1:]
            grid.extend(pts)
            vals.extend(vv)
        return RadialProfile(np.asarray(grid), np.asarray(vals))

    def from_profile(self, profile) -> np.ndarray:
        out = np.empty(self.n)
        for blk, sl in zip(self.blocks, self.block_slices()):
            vals = np.asarray(profile.value(blk.nodes), dtype=float)
            if hasattr(profile, "value_left"):
                vals[-1] = profile.value_left(blk.b)
            out[sl] = vals
        return out


# ---------------------------------------------------------------------------
# Newton with continuation


def _newton_direction(main, off, u, sigma, grad, damping):
    n = main.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = main + damping
    ab[2, :-1] = off
    rhs = np.column_stack([-grad, u])
    sol = solve_banded((1, 1), ab, rhs, check_finite=False)
    x, y = sol[:, 0], sol[:, 1]
    denom = 1.0 + sigma * float(u @ y)
    if sigma != 0.0 and denom > 1e-12:
        x = x - y * (sigma * float(u @ x) / denom)
    return x


def _minimize_stage(prob: DiscreteProblem, v, eps, final: bool, budget: int):
    iters, stalled = 0, 0
    damping_rel = 1e-12
    fval, grad, hess = prob.smoothed(v, eps)
    while iters < budget:
        iters += 1
        main, off, u, sigma = hess
        scale = max(float(np.max(np.abs(main))), 1e-300)
        step_ok = False
        for _ in range(30):
            try:
                d = _newton_direction(main, off, u, sigma, grad, damping_rel * scale)
            except (np.linalg.LinAlgError, ValueError):
                d = None
            if d is not None and np.all(np.isfinite(d)) and float(grad @ d) < 0:
                step_ok = True
                break
            damping_rel *= 100.0
        if not step_ok:
            d = -grad / scale
        slope = float(grad @ d)
        # Newton decrement: stop once the predicted decrease is at roundoff level
        tol = (1e-26 if final else 1e-18) * (1.0 + abs(fval))
        if -slope < tol:
            break
        t, accepted = 1.0, False
        for _ in range(60):
            v_new = v + t * d
            f_new, g_new, h_new = prob.smoothed(v_new, eps)
            if f_new <= fval + 1e-4 * t * slope:
                accepted = True
                break
            # at roundoff the values cannot decide; for a convex objective a
            # nonpositive slope at the trial point still guarantees descent
            if abs(f_new - fval) <= 1e-13 * (1.0 + abs(fval)) and float(g_new @ d) <= 0.0:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if damping_rel < 1e6:
                damping_rel *= 100.0
                continue
            break
        step = float(np.max(np.abs(v_new - v)))
        # decreases at roundoff level: the gradient has hit its noise floor
        stalled = stalled + 1 if fval - f_new <= 1e-15 * (1.0 + abs(fval)) else 0
        v, fval, grad, hess = v_new, f_new, g_new, h_new
        if stalled >= 5:
            break
        damping_rel = max(damping_rel * 0.1, 1e-14) if t == 1.0 else damping_rel
        if step <= 1e-15 * (1.0 + float(np.max(np.abs(v)))):
            break
    return v, fval, grad, iters


@dataclass
class MinimizerResult:
    profile: RadialProfile
    breakdown: EnergyBreakdown
    values: np.ndarray
    discrete_h: float
    certificate: float
    iterations: int
    grad_norm: float
    converged: bool
    stages: list = field(default_factory=list)
    problem: DiscreteProblem | None = field(default=None, repr=False)
    indifferent: tuple = ()

    @property
    def h_value(self) -> float:
        return self.breakdown.h_value


def _polish(prob: DiscreteProblem, v, eps: float, rel_tol: float = 1e-9, max_newton: int = 60, max_sweeps: int = 50):
    """Refine nodes whose gradient is not small against the size of its own terms.

    Near strongly degenerate ends the node terms can sit far below the
    rounding level of ``H`` itself, so value-based stopping leaves those nodes
    unresolved.  The polish runs Newton steps on the Jacobi-scaled system with
    a line search on the sign of the directional derivative (valid by
    convexity) and stops on the scale-free residual.  A few Gauss-Seidel sweeps
    on the unsmoothed node derivatives finish the job.
    """
    v = np.array(v, dtype=float)
    for _ in range(max_newton):
        _, grad, (main, off, u, sigma) = prob.smoothed(v, eps)
        scale = np.maximum(prob.gradient_scale(v, eps), 1e-300)
        if float(np.max(np.abs(grad) / scale)) <= rel_tol:
            break
        js = np.where(main > 0, 1.0 / np.sqrt(np.where(main > 0, main, 1.0)), 1.0)
        try:
            y = _newton_direction(main * js * js, off * js[:-1] * js[1:], u * js, sigma, grad * js, 1e-12)
        except (np.linalg.LinAlgError, ValueError):
            break
        d = js * y
        if not (np.all(np.isfinite(d)) and float(grad @ d) < 0):
            break

        def slope(t):
            return float(prob.smoothed(v + t * d, eps, hessian=False)[1] @ d)

        lo, hi = 0.0, 1.0
        if slope(hi) > 0:
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if slope(mid) > 0:
                    hi = mid
                else:
                    lo = mid
            t = hi if lo == 0.0 else lo
        else:
            t = 1.0
        v = v + t * d
    return _gauss_seidel(prob, v, rel_tol, max_sweeps)


def _gauss_seidel(prob: DiscreteProblem, v, rel_tol: float, max_sweeps: int):
    """Nonlinear Gauss-Seidel on the unsmoothed node derivatives.

    Each node problem is convex in one variable; its root is bracketed and
    refined by ``brentq`` with the outer root derivative frozen per sweep
    (the node's share of the fidelity power is negligible where this matters).
    """
    p = prob.params.p
    v = np.array(v, dtype=float)
    for sweep in range(max_sweeps):
        phi = prob.fidelity_power(v)
        if not phi > 0:
            break
        g1 = phi ** (1.0 / p - 1.0) / p
        order = range(prob.n) if sweep % 2 == 0 else range(prob.n - 1, -1, -1)
        moved = False
        for i in order:
            f0, size = prob.node_slope(v, i, v[i], g1)
            if not size > 0 or abs(f0) <= rel_tol * size:
                continue
            direction = -1.0 if f0 > 0 else 1.0
            step = 1e-6 * (1.0 + abs(v[i]))
            x0, x1 = v[i], v[i] + direction * step
            while prob.node_slope(v, i, x1, g1)[0] * direction < 0:
                x0, step = x1, 2.0 * step
                x1 = v[i] + direction * step
                if step > 1e12:
                    break
            else:
                lo, hi = sorted((x0, x1))
                v[i] = brentq(lambda x: prob.node_slope(v, i, x, g1)[0], lo, hi, xtol=1e-15, rtol=1e-15)
                moved = True
        if not moved:
            break
    return v


def _certificate(prob: DiscreteProblem, v, samples: int, rng) -> float:
    """Most negative ``(H(v + t phi) - H(v)) / (1 + H(v))`` over random perturbations."""
    h0 = prob.value(v)
    worst = math.inf
    for _ in range(samples):
        phi = rng.uniform(-1.0, 1.0, prob.n)
        t = rng.uniform(-1e-3, 1e-3)
        worst = min(worst, (prob.value(v + t * phi) - h0) / (1.0 + h0))
    return worst


def _indifferent_regions(prob: DiscreteProblem) -> tuple:
    p = prob.params
    cuts = [p.a] + [x for blk in prob.blocks for x in (blk.a, blk.b)] + [p.b]
    return tuple((lo, hi) for lo, hi in zip(cuts[::2], cuts[1::2]) if hi > lo)


def minimize_H(
    g,
    spec: RadialWeightSpec,
    params: ProblemParams,
    aux: AuxWeight,
    config: SolverConfig | None = None,
    init="datum",
    quad_config: QuadratureConfig | None = None,
    seed: int = 0,
) -> MinimizerResult:
    """Discrete minimiser of ``H`` over continuous piecewise-linear profiles."""
    config = config or SolverConfig()
    if not math.isfinite(lp_aux_norm(g, aux, params, quad_config)):
        raise DatumNotIntegrable("the datum has infinite weighted L^p norm")
    prob = DiscreteProblem(g, spec, params, aux, config.grid_size, config.grading, config.gauss_order, quad_config)
    rng = np.random.default_rng(seed)
    v = prob.initial(init, rng)
    total, stages, grad = 0, [], np.zeros(prob.n)
    if prob.n:
        eps_seq = config.eps_sequence
        for k, eps in enumerate(eps_seq):
            final = k == len(eps_seq) - 1
            v, fval, grad, its = _minimize_stage(prob, v, eps, final, config.max_iters - total)
            total += its
            stages.append({"eps": eps, "iterations": its, "value": fval, "grad_norm": float(np.max(np.abs(grad)))})
            if total >= config.max_iters:
                break
        v = _polish(prob, v, eps_seq[-1])
    profile = prob.to_profile(v)
    breakdown = evaluate_H(profile, g, spec, params, aux, quad_config)
    dh = prob.value(v) if prob.n else 0.0
    cert = _certificate(prob, v, config.certificate_samples, rng) if prob.n else 0.0
    gnorm = float(np.max(np.abs(grad))) if prob.n else 0.0
    converged = total < config.max_iters and cert >= -config.grad_tol
    result = MinimizerResult(profile, breakdown, v, dh, cert, total, gnorm, converged, stages, prob, _indifferent_regions(prob))
    if total >= config.max_iters:
        raise NonConvergence(f"iteration budget {config.max_iters} exhausted", result)
    return result


def evaluate_H(profile, g, spec: RadialWeightSpec, params: ProblemParams, aux: AuxWeight, config: QuadratureConfig | None = None) -> EnergyBreakdown:
    """Relaxed energy plus fidelity norm, both by the module-level quadratures."""
    dirichlet = tuple(float(integrate_energy(profile, spec, params, (b.a, b.b), config)) for b in aux.bands)
    fidelity = float(integrate_fidelity(profile, g, aux, params, config))
    return EnergyBreakdown(dirichlet, fidelity)


# ---------------------------------------------------------------------------
# coordinate-descent oracle

_GOLD = 0.5 * (math.sqrt(5.0) - 1.0)


def _golden(f, lo, hi, tol, x=None, fx=None):
    """Minimise a unimodal ``f`` on ``[lo, hi]``: golden section with parabolic steps (Brent)."""
    if x is None:
        x = lo + _GOLD * (hi - lo)
        fx = f(x)
    w = v = x
    fw = fv = fx
    step = prev = 0.0
    while True:
        m = 0.5 * (lo + hi)
        tol1 = tol + 1e-15 * abs(x)
        if abs(x - m) <= 2.0 * tol1 - 0.5 * (hi - lo):
            return x, fx
        parabolic = False
        if abs(prev) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            num = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                num = -num
            q = abs(q)
            if abs(num) < abs(0.5 * q * prev) and q * (lo - x) < num < q * (hi - x):
                prev, step = step, num / q
                u = x + step
                if u - lo < 2.0 * tol1 or hi - u < 2.0 * tol1:
                    step = tol1 if x < m else -tol1
                parabolic = True
        if not parabolic:
            prev = (lo - x) if x >= m else (hi - x)
            step = (1.0 - _GOLD) * prev
        u = x + (step if abs(step) >= tol1 else (tol1 if step > 0 else -tol1))
        fu = f(u)
        if fu <= fx:
            if u >= x:
                lo = x
            else:
                hi = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu


def _line_min(f, x0, f0, step, tol):
    """Bracket a minimum of a convex ``f`` around ``x0``, then refine it to ``tol``."""
    step = max(abs(step), tol)
    fr = f(x0 + step)
    if fr < f0:
        lo, mid, fm = x0, x0 + step, fr
        while True:
            step *= 2.0
            nxt = mid + step
            fn = f(nxt)
            if fn >= fm:
                hi = nxt
                break
            lo, mid, fm = mid, nxt, fn
    else:
        fl = f(x0 - step)
        if fl < f0:
            hi, mid, fm = x0, x0 - step, fl
            while True:
                step *= 2.0
                nxt = mid - step
                fn = f(nxt)
                if fn >= fm:
                    lo = nxt
                    break
                hi, mid, fm = mid, nxt, fn
        else:
            lo, mid, fm, hi = x0 - step, x0, f0, x0 + step
    x, fx = _golden(f, lo, hi, tol, mid, fm)
    if fx >= f0:
        return x0, f0
    return x, fx


class _LocalObjective:
    """Incremental evaluation of the discrete ``H`` along box directions.

    A box ``[i, j]`` shifts the nodal values ``v_i .. v_j`` of one interval by a
    common amount.  Only the two cells at the box edges change slope, and only
    Gauss points in cells touching the box change value, so each evaluation is
    a short loop in plain Python.
    """

    def __init__(self, prob: DiscreteProblem):
        self.prob = prob
        self.p = prob.params.p
        self._ci0 = prob.cell_i0.tolist()
        self._cm, self._ch = prob.cell_m.tolist(), prob.cell_h.tolist()
        self._qi0, self._qt = prob.q_i0.tolist(), prob.q_t.tolist()
        self._qw, self._qg = prob.q_w.tolist(), prob.q_g.tolist()
        self.boxes = []
        for sl in prob.block_slices():
            lo, hi = sl.start, sl.stop
            size = 1
            while size < hi - lo:
                self.boxes += [(i, min(i + size, hi) - 1) for i in range(lo, hi, size)]
                size *= 2
            self.boxes.append((lo, hi - 1))
        self._plans = {box: self._plan(*box) for box in self.boxes}

    def _plan(self, i, j):
        inside = lambda k: i <= k <= j
        cells = [
            (k, c, self._cm[k], self._ch[k], inside(c), inside(c + 1))
            for k, c in enumerate(self._ci0)
            if inside(c) != inside(c + 1)
        ]
        quads = [
            (k, c, self._qt[k], self._qw[k], self._qg[k], inside(c), inside(c + 1))
            for k, c in enumerate(self._qi0)
            if inside(c) or inside(c + 1)
        ]
        return cells, quads

    def reset(self, v):
        prob, p = self.prob, self.p
        v = np.asarray(v, dtype=float)
        self.v = v.tolist()
        self.e_terms = (prob.cell_m * np.abs(prob.slopes(v)) ** p).tolist()
        self.q_terms = (prob.q_w * np.abs(prob.interp(v) - prob.q_g) ** p).tolist()
        self.E = math.fsum(self.e_terms)
        self.Phi = math.fsum(self.q_terms)

    def _terms(self, box, t):
        v, p = self.v, self.p
        cells, quads = self._plans[box]
        es = [m * abs((v[c + 1] + t * s1 - v[c] - t * s0) / h) ** p for _, c, m, h, s0, s1 in cells]
        qs = [
            w * abs((1.0 - tt) * (v[c] + t * s0) + tt * (v[c + 1] + t * s1) - g) ** p
            for _, c, tt, w, g, s0, s1 in quads
        ]
        return es, qs

    def line_function(self, box):
        """``t -> H(v + t * 1_box) - H(v)`` from the terms that change.

        Working with the increment keeps nodes whose cells carry tiny weight
        resolvable: their effect on ``H`` is far below the rounding of ``H``.
        """
        cells, quads = self._plans[box]
        e0 = math.fsum(self.e_terms[k] for k, *_ in cells)
        q0 = math.fsum(self.q_terms[k] for k, *_ in quads)
        phi, inv_p = self.Phi, 1.0 / self.p
        root = phi**inv_p

        def f(t):
            es, qs = self._terms(box, t)
            dq = math.fsum(qs) - q0
            if phi > 0.0:
                # (phi + dq)**(1/p) - phi**(1/p) without cancellation
                dfid = root * math.expm1(math.log1p(max(dq / phi, -1.0 + 1e-300)) * inv_p)
            else:
                dfid = max(dq, 0.0) ** inv_p
            return (math.fsum(es) - e0) + dfid

        return f

    def commit(self, box, t):
        es, qs = self._terms(box, t)
        cells, quads = self._plans[box]
        for (k, *_), val in zip(cells, es):
            self.E += val - self.e_terms[k]
            self.e_terms[k] = val
        for (k, *_), val in zip(quads, qs):
            self.Phi += val - self.q_terms[k]
            self.q_terms[k] = val
        i, j = box
        for idx in range(i, j + 1):
            self.v[idx] += t


def _coordinate_descent(prob: DiscreteProblem, v, tol: float, max_sweeps: int, stop: float = 1e-11):
    """Cyclic exact line searches over single nodes and dyadic blocks of nodes."""
    loc = _LocalObjective(prob)
    loc.reset(v)
    scale = 1e-2 * (1.0 + float(np.max(np.abs(v))))
    steps = {box: scale for box in loc.boxes}
    h = prob.value(np.asarray(loc.v))
    for sweep in range(max_sweeps):
        start = np.asarray(loc.v)
        h_start = h
        for box in loc.boxes:
            f = loc.line_function(box)
            t, _ = _line_min(f, 0.0, 0.0, steps[box], tol)
            if t != 0.0:
                loc.commit(box, t)
                steps[box] = max(2.0 * abs(t), tol)
            else:
                steps[box] = max(0.5 * steps[box], tol)
        # pattern move along the displacement of the sweep
        v_cur = np.asarray(loc.v)
        d = v_cur - start
        h_cur = prob.value(v_cur)
        if np.any(d != 0):
            t, ht = _line_min(lambda t: prob.value(v_cur + t * d), 0.0, h_cur, 1.0, 1e-12)
            if t != 0.0 and ht < h_cur:
                v_cur = v_cur + t * d
        loc.reset(v_cur)
        h = prob.value(v_cur)
        moved = float(np.max(np.abs(v_cur - start)))
        if moved <= stop * (1.0 + float(np.max(np.abs(v_cur)))) and h_start - h <= 1e-15 * (1.0 + abs(h)):
            break
    return np.asarray(loc.v), h, sweep + 1


def oracle_minimize(
    g,
    spec: RadialWeightSpec,
    params: ProblemParams,
    aux: AuxWeight,
    coarse_n: int = 9,
    restarts: int = 5,
    seed: int = 0,
    tol: float = 1e-12,
    max_sweeps: int = 20000,
    grading: float | None = None,
    gauss_order: int = 4,
    quad_config: QuadratureConfig | None = None,
) -> RadialProfile:
    """Best of ``restarts`` coordinate-descent runs on the unsmoothed discrete ``H``."""
    if coarse_n > 17:
        raise ValueError("the oracle is meant for coarse grids (coarse_n <= 17)")
    prob = DiscreteProblem(g, spec, params, aux, coarse_n, grading, gauss_order, quad_config)
    if prob.n == 0:
        return prob.to_profile(np.zeros(0))
    rng = np.random.default_rng(seed)
    best_v, best_h = None, math.inf
    for _ in range(restarts):
        v0 = prob.initial("random", rng)
        v, h, _ = _coordinate_descent(prob, v0, tol, max_sweeps)
        if h < best_h:
            best_v, best_h = v, h
    return prob.to_profile(best_v)


# ---------------------------------------------------------------------------
# non-radial competitors (d = 2)


@dataclass(frozen=True, eq=False)
class PolarCompetitor:
    """Values ``Z[j, k]`` at the solver radii ``r_j`` and angles ``2 pi k / K``."""

    values: np.ndarray

    @property
    def n_angles(self) -> int:
        return self.values.shape[1]

    @classmethod
    def radial(cls, v, n_angles: int) -> "PolarCompetitor":
        return cls(np.repeat(np.asarray(v, dtype=float)[:, None], n_angles, axis=1))


@dataclass(frozen=True)
class DominanceReport:
    h_radial: float
    h_competitor: float
    h_radialized: float
    rel_slack: float = 1e-9

    @property
    def radial_wins(self) -> bool:
        return self.h_radial <= self.h_competitor + self.rel_slack * (1.0 + self.h_competitor)

    @property
    def radialization_helps(self) -> bool:
        return self.h_radialized <= self.h_competitor + self.rel_slack * (1.0 + self.h_competitor)

    @property
    def margin(self) -> float:
        return self.h_competitor - self.h_radial


def _polar_value(prob: DiscreteProblem, Z: np.ndarray, n_sub: int = 4) -> float:
    p = prob.params.p
    K = Z.shape[1]
    dtheta = 2.0 * math.pi / K
    Zn = np.roll(Z, -1, axis=1)
    i0 = prob.cell_i0
    h = prob.cell_h[:, None]
    # radial slope averaged over the two angular edges, angular slope at the radial midpoint
    s = 0.5 * ((Z[i0 + 1] - Z[i0]) + (Zn[i0 + 1] - Zn[i0])) / h
    t = 0.5 * ((Zn[i0] - Z[i0]) + (Zn[i0 + 1] - Z[i0 + 1])) / dtheta
    base = prob.cell_m[:, None] / (2.0 * math.pi) * np.abs(s) ** p
    # nonnegative correction for the angular derivative, Gauss in r on each cell
    xg, wg = _gauss(n_sub)
    lo = prob.radii[i0]
    rq = lo[:, None] + 0.5 * (xg + 1.0)[None, :] * prob.cell_h[:, None]
    wq = 0.5 * wg[None, :] * prob.cell_h[:, None]
    dens = rq * prob.spec(rq)
    with np.errstate(divide="ignore", invalid="ignore"):
        full = (s[:, None, :] ** 2 + (t[:, None, :] / rq[:, :, None]) ** 2) ** (0.5 * p)
    corr = np.sum((wq * dens)[:, :, None] * (full - np.abs(s[:, None, :]) ** p), axis=1)
    energy = dtheta * float(np.sum(base + np.maximum(corr, 0.0)))
    v0 = Z[prob.q_i0]
    u = v0 + prob.q_t[:, None] * (Z[prob.q_i0 + 1] - v0)
    phi = float(np.sum(prob.q_w[:, None] * np.abs(u - prob.q_g[:, None]) ** p)) / K
    return energy + phi ** (1.0 / p)


def radial_dominance_check(
    u_radial,
    z: PolarCompetitor,
    spec: RadialWeightSpec,
    params: ProblemParams,
    aux: AuxWeight,
    problem: DiscreteProblem | None = None,
) -> DominanceReport:
    """Compare the radial minimiser with a non-radial competitor in the plane.

    Everything is evaluated with the solver discretisation, extended by a
    bilinear angular discretisation.  The radialised competitor is the angular
    mean, for which convexity gives ``H(z_rad) <= H(z)``; it is evaluated by the
    same polar formula as ``z``.
    """
    if isinstance(u_radial, MinimizerResult):
        problem = problem or u_radial.problem
        v = u_radial.values
    else:
        if problem is None:
            raise ValueError("a DiscreteProblem is needed when passing a bare profile")
        v = problem.from_profile(u_radial)
    if params.d != 2:
        raise ValueError("polar competitors are implemented for d = 2")
    Z = np.asarray(z.values, dtype=float)
    if Z.shape[0] != problem.n or not np.all(np.isfinite(Z)):
        raise CompetitorNotInDomain("competitor must hold finite values at every solver radius")
    hz = _polar_value(problem, Z)
    if not math.isfinite(hz):
        raise CompetitorNotInDomain("competitor has infinite discrete energy")
    # angular mean written so that an already radial competitor is reproduced bit for bit
    z_rad = Z[:, 0] + np.mean(Z - Z[:, :1], axis=1)
    h_rad = _polar_value(problem, np.repeat(z_rad[:, None], Z.shape[1], axis=1))
    return DominanceReport(problem.value(v), hz, h_rad)
