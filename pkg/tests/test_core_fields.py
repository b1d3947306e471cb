import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exp_field, gauss_field
from hslab.axial import ExpPoly, Power, Product
from hslab.errors import ExcludedWeight, HypothesisViolated, InvalidParameter, NonIntegrableWeight
from hslab.fields import Field, PowerWeight, SpaceParams, multiply_power
from hslab.norms import (extend, full_line_lp_norm, hardy_check, homogeneous_sobolev_norm, space_norm, trace,
                         weighted_lp_norm, weighted_sobolev_norm)
from hslab.semigroup import apply_semigroup, witness


# weighted Lebesgue norms: Gamma-integral oracles

@pytest.mark.parametrize("gamma, expected", [
    (0.0, math.sqrt(0.5)),
    (1.0, 0.5),
    (-0.5, (math.gamma(0.5) / math.sqrt(2.0)) ** 0.5),
])
def test_lp_norm_of_exponential(gamma, expected):
    assert weighted_lp_norm(exp_field(), 2.0, gamma) == pytest.approx(expected, rel=1e-10)


def test_lp_norm_frozen_values():
    assert weighted_lp_norm(exp_field(), 2.0, 0.0) == pytest.approx(0.7071068, abs=5e-8)
    # the quoted 1.11951 is the truncation of 1.1195151
    assert weighted_lp_norm(exp_field(), 2.0, -0.5) == pytest.approx(1.11951, abs=1e-5)


def test_lp_norm_general_p():
    # ∫ e^{-px} x^g dx = Γ(g+1)/p^{g+1}
    p, g = 3.0, 1.5
    expected = (math.gamma(g + 1) / p ** (g + 1)) ** (1 / p)
    assert weighted_lp_norm(exp_field(), p, g) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("coeffs, p, gamma, expected", [
    ((1.0, -1.0), 1.5, 0.2, 0.466336531480689),
    ((1.0, -3.0, 1.0), 1.5, 0.2, 0.5649816829615094),
    ((1.0, -3.0, 1.0), 3.0, 0.0, 0.4837679165388719),
])
def test_lp_norm_across_sign_changes(coeffs, p, gamma, expected):
    # |f|^p has kinks at the zeros of f; values from 30-digit adaptive quadrature
    f = Field.axial(ExpPoly(coeffs, 1.0))
    assert weighted_lp_norm(f, p, gamma) == pytest.approx(expected, rel=1e-12)


def test_zero_field_norms():
    z = Field.zero(1)
    assert weighted_lp_norm(z, 2.0, 0.0) == 0.0
    assert weighted_sobolev_norm(z, SpaceParams(2.0, 2, 0.0, 1)) == 0.0


def test_nonintegrable_weight_rejected():
    with pytest.raises(NonIntegrableWeight):
        weighted_lp_norm(exp_field(), 2.0, -1.0)
    with pytest.raises(NonIntegrableWeight):
        PowerWeight(-1.5).require_integrable()


def test_boundary_singularity_checked():
    # x^{-1} e^{-x}: |f|^2 x^{0.5} ~ x^{-1.5} near 0
    f = multiply_power(exp_field(), -1.0)
    with pytest.raises(NonIntegrableWeight):
        weighted_lp_norm(f, 2.0, 0.5)


def test_excluded_weights():
    with pytest.raises(ExcludedWeight):
        SpaceParams(2.0, 1, 1.0, 1).require_sobolev()
    with pytest.raises(ExcludedWeight):
        SpaceParams(3.0, 0, 5.0, 1).require_sobolev()
    SpaceParams(2.0, 1, 2.5, 1).require_sobolev()
    with pytest.raises(InvalidParameter):
        SpaceParams(2.0, 1, 0.5, 0)
    with pytest.raises(InvalidParameter):
        SpaceParams(1.0, 1, 0.5, 1)


# Sobolev norms

def test_sobolev_norm_examples():
    assert weighted_sobolev_norm(exp_field(), SpaceParams(2.0, 0, 0.0, 1)) == pytest.approx(0.7071068, abs=5e-8)
    assert weighted_sobolev_norm(exp_field(), SpaceParams(2.0, 1, 0.0, 1)) == pytest.approx(1.4142136, abs=5e-8)


def test_sobolev_norm_of_x_exp_recomputed():
    # ‖f‖ = √3/2, ‖f'‖ = 1/2 against x^2; the sum is 1.3660
    f = exp_field((0.0, 1.0))
    val = weighted_sobolev_norm(f, SpaceParams(2.0, 1, 2.0, 1))
    assert val == pytest.approx(math.sqrt(3) / 2 + 0.5, rel=1e-10)
    assert val == pytest.approx(1.3660, abs=5e-5)


def test_homogeneous_norm():
    f = exp_field()
    assert homogeneous_sobolev_norm(f, SpaceParams(2.0, 0, 0.5, 1)) == pytest.approx(
        weighted_lp_norm(f, 2.0, 0.5), rel=1e-14)
    assert homogeneous_sobolev_norm(f, SpaceParams(2.0, 1, 0.0, 1)) == pytest.approx(1.2071068, abs=5e-8)


def test_homogeneous_norm_scaling():
    f, r, p, g = exp_field(), 2.0, 2.0, 0.0
    fr = f.dilate(r)
    for order in (0, 1):
        a = (order,)
        base = weighted_lp_norm(f, p, g + order * p, alpha=a)
        scaled = weighted_lp_norm(fr, p, g + order * p, alpha=a)
        assert scaled == pytest.approx(base * r ** (order - (g + order * p + 1) / p), rel=1e-10)


def test_space_norm_dirichlet_and_neumann():
    f = exp_field((0.0, 1.0))
    sp = SpaceParams(2.0, 0, 0.5, 1)
    assert space_norm(f, sp, "dirichlet") == pytest.approx(weighted_lp_norm(f, 2.0, 0.5), rel=1e-14)
    assert space_norm(f, sp, "neumann") == pytest.approx(
        weighted_sobolev_norm(f, SpaceParams(2.0, 1, 0.5, 1)), rel=1e-14)


def test_d2_norm_factorizes():
    from hslab.tangential import HermiteGauss

    f = Field.separable(ExpPoly((1.0,), 1.0), HermiteGauss((0,), 1.0))
    # ∫ G_1(y)^2 dy = 1/(2 sqrt(2π))
    tang = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))
    assert weighted_lp_norm(f, 2.0, 0.0) == pytest.approx(math.sqrt(0.5 * tang), rel=1e-8)


# Hardy inequality

def test_hardy_examples():
    u = exp_field((0.0, 1.0))
    r = hardy_check(u, 2.0, 2.0)
    assert (r.lhs, r.rhs, r.ratio) == pytest.approx((0.5, 0.5, 1.0), rel=1e-10)
    r = hardy_check(u, 2.0, 0.0)
    assert r.lhs == pytest.approx(math.sqrt(0.5), rel=1e-10)
    assert r.rhs == pytest.approx(0.5, rel=1e-10)
    assert r.ratio == pytest.approx(1.4142, abs=5e-5)
    assert r.ratio <= r.ceiling


def test_hardy_zero():
    r = hardy_check(Field.zero(1), 2.0, 0.0)
    assert (r.lhs, r.rhs, r.ratio) == (0.0, 0.0, 0.0)


def test_hardy_hypotheses():
    with pytest.raises(HypothesisViolated):
        hardy_check(exp_field((0.0, 1.0)), 2.0, 1.0)
    with pytest.raises(HypothesisViolated):
        hardy_check(exp_field(), 2.0, 0.0)


def test_hardy_critical_family_increases():
    ratios = []
    for eps in (0.2, 0.1, 0.05):
        u = Field.axial(Product((Power(eps), ExpPoly((1.0,), 1.0))))
        ratios.append(hardy_check(u, 2.0, 1.0, enforce=False).ratio)
    assert ratios[0] < ratios[1] < ratios[2]
    # lhs^2 ~ 1/(2 eps): ratio grows like eps^{-1/2}
    assert ratios[2] / ratios[1] == pytest.approx(math.sqrt(2), rel=0.1)


def test_hardy_on_bump_within_ceiling(bump):
    for p, g in [(2.0, 0.0), (2.0, 2.5), (3.0, 0.5), (3.0, 4.0)]:
        r = hardy_check(bump, p, g)
        assert 0 < r.ratio <= r.ceiling


# multiplication operators

def test_multiply_power(xs):
    f = exp_field()
    np.testing.assert_allclose(multiply_power(f, 1.0)(xs), xs * np.exp(-xs), rtol=1e-14)
    g = multiply_power(multiply_power(f, -0.5), 0.5)
    assert float(np.max(np.abs(g(xs) - f(xs)))) <= 1e-12


def test_norm_equivalence_characterisation():
    f = exp_field((0.0, 0.0, 1.0))
    lhs = weighted_sobolev_norm(f, SpaceParams(2.0, 1, 2.5, 1))
    rhs = weighted_lp_norm(multiply_power(f, 1.0), 2.0, 0.5) + weighted_lp_norm(
        multiply_power(f.derivative((1,)), 1.0), 2.0, 0.5)
    assert 0.1 <= lhs / rhs <= 10.0


def test_multiplication_bounded_on_battery(bump):
    # ‖M^θ f‖_{L^p(w_{γ-θp})} = ‖f‖_{L^p(w_γ)} at k = 0
    for theta in (0.5, 1.0, -0.25):
        for f in (bump, exp_field((0.0, 1.0)), gauss_field((0.0, 1.0))):
            a = weighted_lp_norm(multiply_power(f, theta), 2.0, 2.0 - 2.0 * theta)
            b = weighted_lp_norm(f, 2.0, 2.0)
            assert a == pytest.approx(b, rel=1e-9)


# extensions

def test_extension_values():
    E = extend(exp_field(), "odd")
    assert E(np.array([-1.0]))[0] == pytest.approx(-0.36788, abs=5e-6)
    assert full_line_lp_norm(extend(exp_field(), "even"), 2.0, 0.0) == pytest.approx(1.0, rel=1e-12)


def test_extension_derivative_flip():
    f = exp_field((1.0, 2.0))
    E = extend(f, "even")
    y = np.array([-0.5, 0.5])
    d1 = E(y, alpha=(1,))
    assert abs(d1[0] + f(np.array([0.5]), alpha=(1,))[0]) <= 1e-12
    assert abs(d1[1] - f(np.array([0.5]), alpha=(1,))[0]) <= 1e-12


def test_extension_isometry(bump):
    for f in (exp_field(), bump):
        base = weighted_lp_norm(f, 3.0, 0.5) ** 3
        for parity in ("odd", "even"):
            assert full_line_lp_norm(extend(f, parity), 3.0, 0.5) ** 3 == pytest.approx(2 * base, rel=1e-10)
    with pytest.raises(InvalidParameter):
        extend(exp_field(), "mixed")


# traces

def test_trace_examples():
    assert trace(exp_field(), 0).value == pytest.approx(1.0, abs=1e-10)
    xe = exp_field((0.0, 1.0))
    assert abs(trace(xe, 0).value) <= 1e-10
    assert trace(xe, 1).value == pytest.approx(1.0, abs=1e-8)


def test_trace_of_dirichlet_flow():
    u = apply_semigroup("dirichlet", 1.0, Field.axial(witness()))
    assert abs(trace(u, 0).value) <= 1e-8


# properties

fields_st = st.sampled_from([
    exp_field(), exp_field((0.0, 1.0)), exp_field((1.0, -0.5, 0.25), 2.0),
    gauss_field((0.0, 1.0)), gauss_field((1.0, 0.0, 1.0), 0.5),
])
spaces_st = st.sampled_from([(2.0, 0, 0.0), (2.0, 1, 0.5), (3.0, 1, 2.5), (1.5, 2, 0.2)])


@settings(max_examples=25, deadline=None)
@given(f=fields_st, sp=spaces_st, c=st.sampled_from([0.0, 1.0, 2.5, -2.5]))
def test_norm_homogeneity(f, sp, c):
    p, k, g = sp
    S = SpaceParams(p, k, g, 1)
    for norm in (weighted_sobolev_norm, homogeneous_sobolev_norm):
        a, b = norm(f * c, S), norm(f, S)
        assert a == pytest.approx(abs(c) * b, rel=1e-12, abs=1e-300)


@settings(max_examples=25, deadline=None)
@given(f=fields_st, g=fields_st, a=st.floats(-3, 3), b=st.floats(-3, 3), sp=spaces_st)
def test_triangle_inequality(f, g, a, b, sp):
    p, k, gam = sp
    S = SpaceParams(p, k, gam, 1)
    lhs = weighted_sobolev_norm(f * a + g * b, S)
    rhs = weighted_sobolev_norm(f * a, S) + weighted_sobolev_norm(g * b, S)
    assert lhs <= rhs * (1 + 1e-10) + 1e-300


@settings(max_examples=25, deadline=None)
@given(f=fields_st, x=st.floats(0.2, 5.0))
def test_derivative_matches_central_difference(f, x):
    h = 1e-4
    for n in (1, 2):
        exact = f(np.array([x]), alpha=(n,))[0]
        lo, hi = f(np.array([x - h]), alpha=(n - 1,))[0], f(np.array([x + h]), alpha=(n - 1,))[0]
        fd = (hi - lo) / (2 * h)
        scale = max(abs(exact), float(np.max(np.abs(f(np.linspace(0.2, 5, 50), alpha=(n,))))))
        assert abs(fd - exact) <= 1e-6 * scale
