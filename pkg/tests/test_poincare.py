import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radvar import (
    NotInDomain,
    OrderingViolated,
    PowerBump,
    ProblemParams,
    RadialProfile,
    RadialWeightSpec,
    check_pointwise,
    check_poincare,
    w_norm,
)
from radvar.generators import random_blowup, random_profile, random_weight
from radvar.poincare import endpoint_decay

from helpers import setup

LINEAR = RadialProfile([0.0, 1.0], [0.0, 1.0])


def test_pointwise_unit_example(unit):
    spec, params, _, aux = unit
    rep = check_pointwise(LINEAR, aux, spec, params, 0.125, 0.5, 0)
    assert rep.side == "left"
    assert rep.osc_lhs == pytest.approx(0.75 * math.sqrt(4 / 3), rel=1e-13)
    assert rep.osc_rhs == pytest.approx(math.sqrt(0.75), rel=1e-13)
    # the oscillation bound is attained here
    assert rep.satisfied


def test_pointwise_right_form_and_constant(unit):
    spec, params, _, aux = unit
    rep = check_pointwise(LINEAR, aux, spec, params, 0.9, 0.6, 0)
    assert rep.side == "right" and rep.satisfied
    const = RadialProfile.constant(0.0, 0.0, 1.0)
    rep = check_pointwise(const, aux, spec, params, 0.2, 0.3, 0)
    assert rep.osc_lhs == rep.osc_rhs == 0.0 and rep.osc_slack == 0.0


@pytest.mark.parametrize("zeta,x", [(0.3, 0.2), (0.0, 0.3), (0.4, 0.6), (0.6, 0.7), (0.9, 1.0)])
def test_pointwise_ordering(unit, zeta, x):
    spec, params, _, aux = unit
    with pytest.raises(OrderingViolated):
        check_pointwise(LINEAR, aux, spec, params, zeta, x, 0)


def test_poincare_unit_against_oracle(unit, oracles):
    spec, params, _, aux = unit
    rep = check_poincare(LINEAR, aux, spec, params)
    ref = oracles["quadrature"]
    assert rep.rhs[0] == pytest.approx(ref["unit_poincare_rhs"], rel=1e-12)
    assert rep.lhs[0] == pytest.approx(ref["unit_poincare_lhs"], rel=1e-9)
    assert rep.total_holds and all(rep.intervalwise_holds)
    assert rep.midpoints == (0.5,) and rep.anchors == (0.5,)


def test_poincare_constant_profile(unit):
    spec, params, _, aux = unit
    rep = check_poincare(RadialProfile.constant(3.0, 0.0, 1.0), aux, spec, params)
    assert rep.lhs == (0.0,) and rep.rhs == (0.0,) and rep.margins == (0.0,)


def test_w_norm_against_oracle(unit, oracles):
    spec, params, _, aux = unit
    one = RadialProfile.constant(1.0, 0.0, 1.0)
    assert w_norm(one, aux, spec, params) == pytest.approx(oracles["quadrature"]["unit_w_norm"], rel=1e-9)
    assert w_norm(RadialProfile.constant(0.0, 0.0, 1.0), aux, spec, params) == 0.0


def test_not_in_domain_reports_interval():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((PowerBump(1.0, 0.5, 0.0, 0.4), PowerBump(1.0, 0.5, 0.5, 1.0)))
    _, aux = setup(spec, params)
    jumpy = RadialProfile([0.0, 0.7, 0.7, 1.0], [0.0, 0.0, 1.0, 1.0])
    with pytest.raises(NotInDomain) as info:
        check_poincare(jumpy, aux, spec, params)
    assert info.value.interval == 1
    with pytest.raises(NotInDomain):
        w_norm(jumpy, aux, spec, params)


def _case(seed):
    rng = np.random.default_rng(seed)
    params = ProblemParams(int(rng.integers(1, 4)), float(rng.choice([1.5, 2.0, 3.0])), 0.0, 1.0)
    spec = random_weight(rng, params)
    _, aux = setup(spec, params)
    return rng, params, spec, aux


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(-20, 20).filter(lambda x: abs(x) > 1e-3), shift=st.floats(-50, 50))
def test_homogeneity_and_translation(seed, lam, shift):
    rng, params, spec, aux = _case(seed)
    v = random_profile(rng, 0.0, 1.0)
    base = check_poincare(v, aux, spec, params)
    scaled = check_poincare(lam * v, aux, spec, params)
    moved = check_poincare(v + shift, aux, spec, params)
    f = abs(lam) ** params.p
    np.testing.assert_allclose(scaled.lhs, np.multiply(base.lhs, f), rtol=1e-10, atol=1e-300)
    np.testing.assert_allclose(scaled.rhs, np.multiply(base.rhs, f), rtol=1e-10, atol=1e-300)
    # a shift changes rounding in |v - v(c)|, nothing else
    np.testing.assert_allclose(moved.lhs, base.lhs, rtol=1e-6, atol=1e-9 * (1 + abs(shift)) ** params.p)
    np.testing.assert_allclose(moved.rhs, base.rhs, rtol=1e-12)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1))
def test_poincare_fuzz_and_finite_norm(seed):
    rng, params, spec, aux = _case(seed)
    v = random_profile(rng, 0.0, 1.0)
    rep = check_poincare(v, aux, spec, params)
    assert all(l >= 0 and r >= 0 for l, r in zip(rep.lhs, rep.rhs))
    assert rep.total_holds
    assert all(h for h, c in zip(rep.intervalwise_holds, rep.proof_condition) if c)
    assert rep.refinement_shrinks
    assert math.isfinite(w_norm(v, aux, spec, params))


@settings(max_examples=20)
@given(seed=st.integers(0, 2**32 - 1))
def test_triangle_inequality(seed):
    rng, params, spec, aux = _case(seed)
    u, z = random_profile(rng, 0.0, 1.0), random_profile(rng, 0.0, 1.0)
    lhs = w_norm(u + z, aux, spec, params)
    assert lhs <= (w_norm(u, aux, spec, params) + w_norm(z, aux, spec, params)) * (1 + 1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_endpoint_decay_blowup(seed):
    rng = np.random.default_rng(seed)
    params = ProblemParams(int(rng.integers(1, 4)), float(rng.choice([1.5, 2.0, 3.0])), 0.0, 1.0)
    case = random_blowup(rng, params)
    _, aux = setup(case.spec, params)
    r, vals = endpoint_decay(case.blowup.profile, aux, params, 0, "left", n=16)
    assert np.all(np.isfinite(vals))
    assert vals[-1] < 1e-3 * max(vals[0], 1e-300) or vals[-1] < 1e-12
    assert np.all(np.diff(vals[4:]) <= 1e-12 * vals[4:-1])
