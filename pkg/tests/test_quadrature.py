import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from radvar import (
    Constant,
    PowerBump,
    ProblemParams,
    RadialProfile,
    RadialWeightSpec,
    integrate_energy,
    integrate_fidelity,
    integrate_inverse_kernel,
)
from radvar.quadrature import (
    DEFAULT_CONFIG,
    DomainMismatch,
    QuadratureConfig,
    composite_rule,
    endpoint_exponent,
    graded_quad,
    is_integrable_exponent,
    power_integral,
)

from helpers import setup

ADAPTIVE = dataclasses.replace(DEFAULT_CONFIG, closed_forms=False)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_depth=0)


def test_unit_kernel(unit):
    spec, params, _, _ = unit
    assert integrate_inverse_kernel(spec, params, 0.125, 0.5) == pytest.approx(0.375, rel=1e-14)
    assert integrate_inverse_kernel(spec, params, 0.3, 0.3) == 0.0


def test_bump_kernel_antiderivative():
    m, alpha, a, b, p = 1.7, 1.2, 0.2, 0.8, 2.5
    ap = alpha / (p - 1)
    params = ProblemParams(1, p, 0.0, 1.0)
    spec = RadialWeightSpec((PowerBump(m, alpha, a, b),))
    mid = 0.5 * (a + b)
    for r in (0.21, 0.3, 0.45):
        expected = m ** (-1 / (p - 1)) * ((r - a) ** (1 - ap) - ((b - a) / 2) ** (1 - ap)) / (ap - 1)
        assert integrate_inverse_kernel(spec, params, r, mid) == pytest.approx(expected, rel=1e-13)
        assert integrate_inverse_kernel(spec, params, r, mid, ADAPTIVE) == pytest.approx(expected, rel=1e-10)


def test_divergent_endpoint_gives_inf():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((PowerBump(1.0, 3.0, 0.3, 0.6),))
    assert integrate_inverse_kernel(spec, params, 0.3, 0.45) == math.inf
    assert math.isfinite(integrate_inverse_kernel(spec, params, 0.31, 0.45))


def test_energy_examples(unit):
    spec, params, _, _ = unit
    assert integrate_energy(RadialProfile.constant(3.0, 0.0, 1.0), spec, params, (0.0, 1.0)) == 0.0
    v = RadialProfile([0.0, 1.0], [0.0, 1.0])
    assert integrate_energy(v, spec, params, (0.0, 1.0)) == pytest.approx(2.0, rel=1e-15)
    params2 = ProblemParams(2, 2.0, 0.0, 2.0)
    spec2 = RadialWeightSpec((Constant(1.0, 1.0, 2.0),))
    v2 = RadialProfile([1.0, 2.0], [1.0, 2.0])
    assert integrate_energy(v2, spec2, params2, (1.0, 2.0)) == pytest.approx(3 * math.pi, rel=1e-14)


def test_energy_requires_cover(unit):
    spec, params, _, _ = unit
    with pytest.raises(DomainMismatch):
        integrate_energy(RadialProfile([0.2, 1.0], [0.0, 1.0]), spec, params, (0.0, 1.0))


def test_fidelity_examples(unit, oracles):
    spec, params, _, aux = unit
    g = RadialProfile([0.0, 0.4, 1.0], [1.0, -2.0, 0.5])
    assert integrate_fidelity(g, g, aux, params) == 0.0
    shifted = g + 1.0
    ref = oracles["quadrature"]["unit_fidelity_norm"]
    assert integrate_fidelity(shifted, g, aux, params) == pytest.approx(ref, rel=1e-9)
    assert ref == pytest.approx(math.sqrt(2 + 2 * math.log(2)), rel=1e-10)


def test_fidelity_vanishes_without_intervals():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(0.0, 0.2, 0.8),))
    _, aux = setup(spec, params)
    u = RadialProfile([0.0, 1.0], [5.0, -3.0])
    assert integrate_fidelity(u, RadialProfile.constant(0.0, 0.0, 1.0), aux, params) == 0.0


def test_fidelity_requires_cover(unit):
    _, params, _, aux = unit
    with pytest.raises(DomainMismatch):
        integrate_fidelity(RadialProfile([0.0, 0.5], [0.0, 1.0]), RadialProfile([0.0, 1.0], [0.0, 1.0]), aux, params)


@given(
    x=st.floats(0.201, 0.799),
    y=st.floats(0.201, 0.799),
    z=st.floats(0.201, 0.799),
    alpha_p=st.floats(0.1, 3.0),
    p=st.sampled_from([1.5, 2.0, 3.0]),
)
def test_additivity(x, y, z, alpha_p, p):
    lo, mid, hi = sorted((x, y, z))
    params = ProblemParams(2, p, 0.0, 1.0)
    spec = RadialWeightSpec((PowerBump(1.3, alpha_p * (p - 1), 0.2, 0.8, compensate=False),))
    whole = integrate_inverse_kernel(spec, params, lo, hi)
    parts = integrate_inverse_kernel(spec, params, lo, mid) + integrate_inverse_kernel(spec, params, mid, hi)
    assert parts == pytest.approx(whole, rel=1e-10, abs=1e-300)


def test_closed_form_agreement_1000_ranges(rng):
    for alpha_p, p, d in [(0.4, 2.0, 1), (1.7, 1.5, 2), (2.5, 3.0, 3)]:
        params = ProblemParams(d, p, 0.0, 1.0)
        spec = RadialWeightSpec((PowerBump(0.9, alpha_p * (p - 1), 0.25, 0.75, True, d),))
        ends = np.sort(rng.uniform(0.25, 0.75, (2, 334)), axis=0)
        exact = integrate_inverse_kernel(spec, params, ends[0], ends[1])
        adaptive = integrate_inverse_kernel(spec, params, ends[0], ends[1], ADAPTIVE)
        np.testing.assert_allclose(adaptive, exact, rtol=DEFAULT_CONFIG.rel_tol)


@given(lam=st.floats(0.01, 100.0), p=st.sampled_from([1.5, 2.0, 3.0]))
def test_scaling_homogeneity(lam, p):
    params = ProblemParams(2, p, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(2.0, 0.1, 0.4), PowerBump(1.0, 0.7 * (p - 1), 0.4, 0.9, True, 2)))
    scaled = spec.scaled(lam)
    k = integrate_inverse_kernel(spec, params, 0.15, 0.85)
    assert integrate_inverse_kernel(scaled, params, 0.15, 0.85) == pytest.approx(lam ** (-1 / (p - 1)) * k, rel=1e-12)
    v = RadialProfile([0.0, 0.3, 0.6, 1.0], [0.0, 1.0, -1.0, 2.0])
    e = integrate_energy(v, spec, params, (0.1, 0.9))
    assert integrate_energy(v, scaled, params, (0.1, 0.9)) == pytest.approx(lam * e, rel=1e-12)


def test_power_integral_log_case():
    assert power_integral(0.5, 2.0, 1.0) == pytest.approx(math.log(4.0), rel=1e-15)
    assert power_integral(0.0, 1.0, 0.5) == pytest.approx(2.0, rel=1e-15)
    assert power_integral(0.0, 1.0, 1.0) == math.inf


def test_graded_quad_endpoint_singularity():
    # int_0^1 s**-0.9 ds = 10
    assert graded_quad(lambda s: s**-0.9, 0.0, 1.0, 0.0) == pytest.approx(10.0, rel=1e-9)
    # int_0^1 (1 - s)**-0.5 ds = 2
    f = lambda s: (1 - s) ** -0.5
    assert graded_quad(f, 0.0, 1.0, None, 1.0, offset_f=lambda t: t**-0.5) == pytest.approx(2.0, rel=1e-10)


@pytest.mark.parametrize("beta", [0.3, 0.9, 1.0, 1.5, 3.0])
def test_endpoint_exponent_estimates_power(beta):
    f = lambda x, y: power_integral(x, y, beta)
    est = endpoint_exponent(f, 0.0, 1, 0.1)
    assert est == pytest.approx(beta, abs=1e-6)
    assert is_integrable_exponent(est) is (beta < 1)


def test_composite_rule_integrates_polynomials_exactly():
    r, w = composite_rule(0.0, 1.0, np.array([0.3, 0.7]), 8)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-14)
    assert np.sum(w * r**7) == pytest.approx(1 / 8, rel=1e-13)
