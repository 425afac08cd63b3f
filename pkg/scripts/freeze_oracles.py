"""Recompute the frozen reference values in tests/data/oracles.json.

The quadrature references use brute-force midpoint sums over 10**6 cells of
hand-derived formulas for the unit weight on (0, 1) with d = 1, p = 2, where

    eta_hat(r) = 1/(0.5 - r) on (0, 1/4],  4 on [1/4, 3/4],  1/(r - 0.5) on [3/4, 1).

They never call the package.  The minimiser references come from the
coordinate-descent oracle on a coarse grid, run once and stored, so that the
tests compare the Newton solver against fixed numbers.
"""

import json
from pathlib import Path

import numpy as np

from radvar import ProblemParams, RadialProfile, RadialWeightSpec, Constant, PowerBump
from radvar import build_aux_weight, decompose_degeneracy, oracle_minimize

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"
N = 10**6


def unit_eta_hat(r):
    return np.where(r <= 0.25, 1.0 / (0.5 - r), np.where(r >= 0.75, 1.0 / (r - 0.5), 4.0))


def midpoint(f, lo=0.0, hi=1.0, n=N):
    r = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    return float(np.sum(f(r)) * (hi - lo) / n)


def quadrature_refs():
    omega, p = 2.0, 2.0
    # ||1||^2 in L^2(w_hat): omega * int (eta_hat / omega)^(p-1)
    norm_sq = midpoint(lambda r: omega * (unit_eta_hat(r) / omega) ** (p - 1))
    # Poincare left side for v(r) = r anchored at c = 0.5
    lhs = midpoint(lambda r: omega ** (p - 1) * omega * np.abs(r - 0.5) ** p * (unit_eta_hat(r) / omega) ** (p - 1))
    return {
        "unit_fidelity_norm": norm_sq**0.5,
        "unit_w_norm": norm_sq**0.5,
        "unit_poincare_lhs": lhs,
        "unit_poincare_rhs": 2.0,
    }


def minimiser_refs():
    cases = {
        "unit_d1_p2_g_r": (ProblemParams(1, 2.0, 0.0, 1.0), RadialWeightSpec((Constant(1.0, 0.0, 1.0),)),
                           RadialProfile([0.0, 1.0], [0.0, 1.0])),
        "bump_d2_p1.5": (ProblemParams(2, 1.5, 0.0, 1.0), RadialWeightSpec((PowerBump(1.0, 0.5, 0.1, 0.9, True, 2),)),
                         RadialProfile([0.0, 0.3, 0.6, 1.0], [0.0, 1.0, -0.5, 0.7])),
        "bump_d3_p3": (ProblemParams(3, 3.0, 0.0, 1.0), RadialWeightSpec((PowerBump(2.0, 1.0, 0.2, 0.8, True, 3),)),
                       RadialProfile([0.0, 0.5, 1.0], [1.0, -1.0, 2.0])),
    }
    out = {}
    for name, (params, spec, g) in cases.items():
        aux = build_aux_weight(decompose_degeneracy(spec, params), spec, params)
        prof = oracle_minimize(g, spec, params, aux, coarse_n=9, seed=0)
        out[name] = {"grid": prof.grid.tolist(), "values": prof.values.tolist()}
    return out


def main():
    data = {"quadrature": quadrature_refs(), "minimiser_n9": minimiser_refs()}
    OUT.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
