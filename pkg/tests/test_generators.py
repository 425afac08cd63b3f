import numpy as np
import pytest

from radvar import PowerBump, ProblemParams, decompose_degeneracy
from radvar.generators import random_blowup, random_polar_competitor, random_profile, random_weight


@pytest.mark.parametrize("seed", range(20))
def test_random_weight_inside_unit_interval(seed):
    rng = np.random.default_rng(seed)
    params = ProblemParams(int(rng.integers(1, 4)), float(rng.choice([1.5, 2.0, 3.0])), 0.0, 1.0)
    spec = random_weight(rng, params)
    assert 1 <= len(spec.pieces) <= 3
    assert all(0.0 <= q.lo < q.hi <= 1.0 for q in spec.pieces)
    assert 1 <= decompose_degeneracy(spec, params).n_eta <= 3


def test_same_seed_same_draws():
    params = ProblemParams(2, 2.0, 0.0, 1.0)
    a = random_weight(np.random.default_rng(9), params)
    b = random_weight(np.random.default_rng(9), params)
    assert a == b
    pa = random_profile(np.random.default_rng(9), 0.0, 1.0)
    pb = random_profile(np.random.default_rng(9), 0.0, 1.0)
    assert np.array_equal(pa.grid, pb.grid) and np.array_equal(pa.values, pb.values)


def test_random_profile_ranges(rng):
    for _ in range(50):
        v = random_profile(rng, 0.2, 0.7)
        assert v.grid[0] == 0.2 and v.grid[-1] == 0.7
        assert 2 <= v.grid.size <= 64 and np.all(np.abs(v.values) <= 10)


@pytest.mark.parametrize("seed", range(10))
def test_random_blowup_vanishing_ends(seed):
    rng = np.random.default_rng(seed)
    params = ProblemParams(int(rng.integers(1, 4)), float(rng.choice([1.5, 2.0, 3.0])), 0.0, 1.0)
    case = random_blowup(rng, params)
    (bump,) = case.spec.pieces
    assert isinstance(bump, PowerBump) and bump.alpha / (params.p - 1) > 1
    assert case.blowup.kappa > 0 and case.blowup.gamma > 0
    deltas = case.deltas()
    assert np.all(np.diff(deltas) < 0) and deltas[0] < 0.5 * (bump.hi - bump.lo)


def test_polar_competitor_shape(rng):
    v = np.linspace(0, 1, 9)
    z = random_polar_competitor(rng, v, n_angles=8)
    assert z.values.shape == (9, 8) and z.n_angles == 8
