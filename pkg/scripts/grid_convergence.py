"""Grid convergence of the discrete minimiser of H.

Minimises H on successively refined grids and reports the minimal value and
the sup distance of each solution to the finest one at the coarse nodes.

    python3 scripts/grid_convergence.py [config.json]
"""

import sys

import numpy as np

from radvar import SolverConfig, build_aux_weight, decompose_degeneracy, minimize_H
from radvar.cli import load_config
from radvar.generators import random_profile


def main(path="configs/power_bump.json"):
    spec, params = load_config(path)
    aux = build_aux_weight(decompose_degeneracy(spec, params), spec, params)
    g = random_profile(np.random.default_rng(0), params.a, params.b, n_nodes=12, amplitude=1.0)
    sizes = (17, 33, 65, 129, 257, 513)
    results = [minimize_H(g, spec, params, aux, SolverConfig(grid_size=n)) for n in sizes]
    fine = results[-1].profile
    coarse = results[0].problem.radii
    print(f"{'n':>5} {'H':>16} {'sup dist to finest':>20} {'iterations':>11}")
    for n, res in zip(sizes, results):
        dist = float(np.max(np.abs(res.profile.value(coarse) - fine.value(coarse))))
        print(f"{n:5d} {res.h_value:16.10f} {dist:20.3e} {res.iterations:11d}")


if __name__ == "__main__":
    main(*sys.argv[1:])
