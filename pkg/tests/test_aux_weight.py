import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from radvar import (
    BoundaryBehavior,
    Constant,
    OutsideMonotoneBand,
    PowerBump,
    ProblemParams,
    RadialWeightSpec,
    aux_derivative,
    boundary_behavior,
    eval_aux,
    eval_truncated,
)

from helpers import setup


def closed_form_left_band(m, alpha, a, b, p, t):
    ap = alpha / (p - 1)
    x = t - a
    return (ap - 1) * m ** (1 / (p - 1)) * x ** (ap - 1) / (1 - (2 * x / (b - a)) ** (ap - 1))


def test_unit_weight_values(unit):
    _, _, _, aux = unit
    t = np.array([0.0, 0.125, 0.25, 0.5, 0.75, 0.875, 1.0])
    np.testing.assert_allclose(aux.eval(t), [2, 8 / 3, 4, 4, 4, 8 / 3, 2], rtol=1e-14)
    assert eval_aux(aux, 0.125) == pytest.approx(8 / 3, rel=1e-14)
    assert aux.w_hat(0.5) == pytest.approx(2.0)


def test_band_continuity(unit):
    _, _, _, aux = unit
    band = aux.bands[0]
    assert aux.eval(band.q1) == aux.eval(band.q2) == band.mid_value
    eps = 1e-9
    assert aux.eval(band.q1 - eps) == pytest.approx(band.mid_value, rel=1e-7)
    assert aux.eval(band.q2 + eps) == pytest.approx(band.mid_value, rel=1e-7)


def test_no_intervals_gives_zero_weight():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((Constant(0.0, 0.2, 0.8),)), params)
    assert np.all(aux.eval(np.linspace(0, 1, 11)) == 0.0)


def test_zero_between_intervals():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((Constant(1.0, 0.1, 0.3), Constant(1.0, 0.6, 0.9))), params)
    assert aux.eval(0.45) == 0.0 and aux.eval(0.2) > 0


@pytest.mark.parametrize("m,alpha,a,b,p,d", [(2.0, 3.0, 0.3, 0.6, 2.0, 2), (0.7, 0.4, 0.1, 0.9, 1.5, 3), (1.3, 5.0, 0.0, 0.5, 3.0, 1)])
def test_closed_form_power_bump(m, alpha, a, b, p, d):
    params = ProblemParams(d, p, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((PowerBump(m, alpha, a, b, True, d),)), params)
    t = np.linspace(a, 0.25 * (3 * a + b), 20)[1:]
    np.testing.assert_allclose(aux.eval(t), closed_form_left_band(m, alpha, a, b, p, t), rtol=1e-12)


def test_truncated_weight(unit):
    spec, _, _, aux = unit
    assert eval_truncated(aux, spec, 0.125) == 1.0
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec5 = RadialWeightSpec((Constant(5.0, 0.0, 1.0),))
    _, aux5 = setup(spec5, params)
    assert eval_truncated(aux5, spec5, 0.5) == 1.0
    spec0 = RadialWeightSpec((Constant(1.0, 0.0, 0.5),))
    _, aux0 = setup(spec0, params)
    assert eval_truncated(aux0, spec0, 0.7) == 0.0


def test_derivative_examples(unit):
    spec, params, _, aux = unit
    assert aux_derivative(aux, spec, params, 0.125) == pytest.approx(64 / 9, rel=1e-13)
    assert aux_derivative(aux, spec, params, 0.875) == pytest.approx(-64 / 9, rel=1e-13)
    with pytest.raises(OutsideMonotoneBand):
        aux_derivative(aux, spec, params, 0.5)
    with pytest.raises(OutsideMonotoneBand):
        aux_derivative(aux, spec, params, 1.5)


@pytest.mark.parametrize("alpha,expected", [(3.0, BoundaryBehavior.VANISHING_LIMIT), (0.5, BoundaryBehavior.FINITE_EXTENSION)])
def test_boundary_behavior_bump(alpha, expected):
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    decomp, aux = setup(RadialWeightSpec((PowerBump(1.0, alpha, 0.3, 0.6),)), params)
    assert boundary_behavior(aux, decomp, 0, "left") is expected
    end_value = aux.bands[0].left_value
    assert bool(end_value == 0.0) is (expected is BoundaryBehavior.VANISHING_LIMIT)


def test_boundary_behavior_unit(unit):
    _, _, decomp, aux = unit
    for side in ("left", "right"):
        assert boundary_behavior(aux, decomp, 0, side) is BoundaryBehavior.FINITE_EXTENSION
    with pytest.raises(IndexError):
        boundary_behavior(aux, decomp, 1, "left")


def test_finite_limit_matches_band_limit():
    params = ProblemParams(2, 2.0, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((PowerBump(1.0, 0.5, 0.2, 0.8, True, 2),)), params)
    band = aux.bands[0]
    assert aux.eval(0.2 + 1e-14) == pytest.approx(band.left_value, rel=1e-6)


def test_mid_rule_min_vs_left():
    # an asymmetric weight: constant on the left, bump on the right
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(1.0, 0.0, 0.5), PowerBump(1.0, 0.5, 0.5, 1.0)))
    _, aux_min = setup(spec, params)
    _, aux_left = setup(spec, params, mid_rule="left")
    bmin, bleft = aux_min.bands[0], aux_left.bands[0]
    assert bmin.mid_value == min(bmin.q1_limit, bmin.q2_limit)
    assert bleft.mid_value == bleft.q1_limit
    assert bmin.mid_value < bleft.mid_value
    # the left rule overshoots the right band limit, leaving a downward jump at q2
    assert bleft.jumps["q2"] < 0 and bmin.jumps["q2"] == 0.0


@given(
    alpha_p=st.floats(0.1, 3.0).filter(lambda a: abs(a - 1) > 1e-3),
    p=st.sampled_from([1.5, 2.0, 3.0]),
    d=st.integers(1, 3),
    m=st.floats(0.1, 10.0),
)
def test_monotone_bands_and_bounds(alpha_p, p, d, m):
    params = ProblemParams(d, p, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((PowerBump(m, alpha_p * (p - 1), 0.2, 0.9, True, d),)), params)
    band = aux.bands[0]
    left = aux.eval(np.linspace(band.a, band.q1, 200)[1:])
    right = aux.eval(np.linspace(band.q2, band.b, 200)[:-1])
    assert np.all(np.diff(left) >= -1e-12 * left[1:])
    assert np.all(np.diff(right) <= 1e-12 * right[:-1])
    inside = aux.eval(np.linspace(band.a, band.b, 101)[1:-1])
    assert np.all(inside > 0) and np.all(np.isfinite(inside))
    assert np.max(inside) <= aux.sup() * (1 + 1e-12)


@given(lam=st.floats(0.01, 100.0), p=st.sampled_from([1.5, 2.0, 3.0]), d=st.integers(1, 3))
def test_scaling_covariance(lam, p, d):
    params = ProblemParams(d, p, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(2.0, 0.1, 0.4), PowerBump(1.0, 1.7 * (p - 1), 0.4, 0.9, True, d)))
    _, aux = setup(spec, params)
    _, aux_l = setup(spec.scaled(lam), params)
    t = np.linspace(0.1, 0.9, 37)
    np.testing.assert_allclose(aux_l.eval(t), lam ** (1 / (p - 1)) * aux.eval(t), rtol=1e-12)


def test_two_sided_bounds_when_kernel_integrable():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    _, aux = setup(RadialWeightSpec((Constant(0.5, 0.0, 0.4), Constant(3.0, 0.4, 1.0))), params)
    vals = aux.eval(np.linspace(0.0, 1.0, 501))
    assert vals.min() > 0 and math.isfinite(vals.max())


@given(t=st.floats(0.0, 1.0))
def test_truncation_bound(t):
    params = ProblemParams(2, 1.5, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(4.0, 0.0, 0.3), PowerBump(2.0, 1.0, 0.3, 1.0, True, 2)))
    _, aux = setup(spec, params)
    assert eval_truncated(aux, spec, t) <= min(aux.eval(t), 1.0)
