import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exp_field, gauss_field, rel_err
from hslab.errors import InvalidParameter, SectorViolation
from hslab.fields import Field, SpaceParams
from hslab.kernels import SectorTime, heat_kernel_free, heat_kernel_halfspace, kernel_sector_bound_check
from hslab.norms import trace
from hslab.quadrature import gauss_legendre
from hslab.semigroup import (apply_semigroup, blowup_probe, fit_exponent, generator_residual, growth_experiment,
                             log_integral_partials, witness)

X = np.linspace(0.05, 8.0, 50)


# kernels

def test_free_kernel_values():
    assert heat_kernel_free(1.0, 0.0) == pytest.approx(0.2820948, abs=5e-8)
    x = np.linspace(-3, 3, 13)
    z = 0.7 + 0.4j
    np.testing.assert_array_equal(heat_kernel_free(z, x), heat_kernel_free(z, -x))


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_free_kernel_mass_d2(t):
    L = 12 * math.sqrt(t)
    x, w = gauss_legendre(80)
    x, w = L * x, L * w
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    G = heat_kernel_free(t, np.stack([X1, X2], axis=-1), d=2)
    assert abs(float(w @ G @ w) - 1.0) <= 1e-10


def test_halfspace_kernel_values():
    # (1 - e^{-1})/sqrt(4π) = 0.1783179
    assert heat_kernel_halfspace(1.0, 1.0, 1.0, "dirichlet") == pytest.approx(
        (1 - math.exp(-1)) / math.sqrt(4 * math.pi), rel=1e-14)
    assert heat_kernel_halfspace(1.0, 1.0, 1.0, "dirichlet") == pytest.approx(0.1783179, abs=5e-8)


def test_halfspace_kernel_identities():
    y = np.linspace(0.1, 4, 9)
    for t in (0.1, 1.0, 3.0):
        assert np.max(np.abs(heat_kernel_halfspace(t, 0.0, y, "dirichlet"))) <= 1e-15
        for x in (0.2, 1.5):
            s = heat_kernel_halfspace(t, x, y, "dirichlet") + heat_kernel_halfspace(t, x, y, "neumann")
            np.testing.assert_allclose(s, 2 * heat_kernel_free(t, x - y), rtol=1e-13)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(1e-2, 1e2), x=st.floats(1e-3, 10), y=st.floats(1e-3, 10))
def test_kernel_positivity(t, x, y):
    assert heat_kernel_halfspace(t, x, y, "dirichlet") >= 0
    assert heat_kernel_halfspace(t, x, y, "neumann") >= 0


def test_sector_time_guards():
    with pytest.raises(SectorViolation):
        SectorTime(-1.0)
    with pytest.raises(SectorViolation):
        SectorTime(1 + 2j, sigma=math.pi / 4)
    with pytest.raises(InvalidParameter):
        SectorTime(1.0, sigma=2.0)


def test_kernel_sector_bounds():
    tg, xy = np.geomspace(0.1, 10, 7), np.linspace(0.05, 4, 12)
    assert kernel_sector_bound_check(0.0, tg, xy) == 1.0
    d = math.pi / 4
    assert kernel_sector_bound_check(d, tg, xy, "dirichlet", normalized=True) <= math.sqrt(2) + 1e-10
    assert kernel_sector_bound_check(d, tg, xy, "dirichlet") <= math.cos(d) ** -1.5 + 1e-10
    d = math.pi / 3
    assert kernel_sector_bound_check(d, tg, xy, "neumann", normalized=True) <= 1 + 1e-10
    assert kernel_sector_bound_check(d, tg, xy, "neumann") <= math.cos(d) ** -0.5 + 1e-10


# semigroups against closed-form flows

def test_dirichlet_odd_gaussian_flow():
    u = apply_semigroup("dirichlet", 1.0, gauss_field((0.0, 1.0)))
    assert rel_err(u(X), 2 ** -1.5 * X * np.exp(-X ** 2 / 8)) <= 1e-8


def test_neumann_even_gaussian_flow():
    u = apply_semigroup("neumann", 3.0, gauss_field((1.0,)))
    assert rel_err(u(X), 0.5 * np.exp(-X ** 2 / 16)) <= 1e-8


def test_complex_time_flow():
    # (1+z)^{-3/2} x e^{-x^2/(4(1+z))}
    z = 0.8 + 0.6j
    u = apply_semigroup("dirichlet", z, gauss_field((0.0, 1.0)))
    assert rel_err(u(X), (1 + z) ** -1.5 * X * np.exp(-X ** 2 / (4 * (1 + z)))) <= 1e-8


def test_semigroup_law(bump):
    for f, bc in ((bump, "dirichlet"), (bump, "neumann"), (exp_field((0.0, 1.0)), "dirichlet")):
        for t in (0.25, 0.5, 1.0):
            for s in (0.25, 0.5, 1.0):
                lhs = apply_semigroup(bc, t, apply_semigroup(bc, s, f))(X)
                rhs = apply_semigroup(bc, t + s, f)(X)
                assert float(np.max(np.abs(lhs - rhs))) <= 1e-8


def test_strong_continuity(bump):
    x = np.linspace(0.4, 3.0, 60)
    res = [float(np.max(np.abs(apply_semigroup("dirichlet", t, bump)(x) - bump(x)))) for t in (1e-2, 1e-3, 1e-4)]
    # first order in t: T(t)f - f ≈ t Δf
    assert res[0] > res[1] > res[2]
    assert res[0] / res[1] >= 5 and res[1] / res[2] >= 5
    assert res[2] <= 1.01e-4 * float(np.max(np.abs(bump(x, alpha=(2,)))))


def test_boundary_conditions(bump):
    u = apply_semigroup("dirichlet", 0.5, bump)
    assert abs(trace(u, 0).value) <= 1e-8
    v = apply_semigroup("neumann", 0.5, bump)
    assert abs(trace(v, 1, tol=1e-6).value) <= 1e-6


def test_neumann_mass_conservation(bump):
    from hslab.quadrature import DEFAULT_QUAD, integrate_half_line

    for f in (bump, exp_field()):
        m0 = integrate_half_line(f, 0.0, DEFAULT_QUAD, 60.0, f.breakpoints, f.scale)
        for t in (0.5, 2.0):
            u = apply_semigroup("neumann", t, f)
            assert abs(integrate_half_line(u, 0.0, DEFAULT_QUAD, 60.0, f.breakpoints, f.scale) - m0) <= 1e-9


def test_consistency_across_spaces(bump):
    a = apply_semigroup("dirichlet", 1.0, bump, space=SpaceParams(2.0, 0, 0.5, 1))(X)
    b = apply_semigroup("dirichlet", 1.0, bump, space=SpaceParams(2.0, 1, 2.5, 1))(X)
    np.testing.assert_array_equal(a, b)


def test_analytic_in_time():
    f = gauss_field((0.0, 1.0))
    x0 = np.array([0.7])
    z0, h = 1 + 0.5j, 1e-3

    def F(z):
        return apply_semigroup("dirichlet", z, f)(x0)[0]

    cr = abs((F(z0 + h) - F(z0 - h)) / (2 * h) - (F(z0 + 1j * h) - F(z0 - 1j * h)) / (2j * h))
    assert cr <= 1e-6


def test_d2_separable_flow():
    from hslab.tangential import HermiteGauss

    f = Field.separable(gauss_field((0.0, 1.0)).terms[0].axial, HermiteGauss((0,), 1.0))
    u = apply_semigroup("dirichlet", 1.0, f)
    pts = np.array([[0.0], [0.5], [-1.2]])
    got = u.grid(X, pts)
    ax = 2 ** -1.5 * X * np.exp(-X ** 2 / 8)
    tang = heat_kernel_free(2.0, pts[:, 0])
    assert rel_err(got, np.outer(ax, tang)) <= 1e-8


# generator

def test_generator_residual():
    f = gauss_field((0.0, 1.0))
    r2, r3 = generator_residual("dirichlet", f, 1e-2), generator_residual("dirichlet", f, 1e-3)
    # first-order decay: a tenfold smaller h gives a roughly tenfold smaller residual
    assert r3 <= r2 / 5
    assert generator_residual("dirichlet", Field.zero(1), 1e-3) == 0.0


# growth and blow-up

def test_fit_exponent_on_power_law():
    t = np.geomspace(10, 1e4, 12)
    fit = fit_exponent(t, 3.0 * t ** 0.4)
    assert fit.slope == pytest.approx(0.4, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("bc, sp, slope, tol", [
    ("dirichlet", (2.0, 1, 2.5), 0.375, 0.05),
    ("neumann", (2.0, 0, 1.5), 0.125, 0.05),
    ("dirichlet", (2.0, 0, 1.5), 0.0, 0.03),
])
def test_growth_exponents(bc, sp, slope, tol):
    fit = growth_experiment(bc, SpaceParams(*sp, 1))
    assert abs(fit.slope - slope) <= tol
    assert fit.r_squared >= 0.98


@pytest.mark.parametrize("bc, gamma", [("dirichlet", 3.0), ("neumann", 1.0)])
def test_blowup(bc, gamma):
    r = blowup_probe(bc, 2.0, gamma)
    assert r.verdict == "DIVERGES"
    assert r.membership_converged
    assert all(b > a for a, b in zip(r.partials, r.partials[1:]))
    assert min(r.growth_ratios) >= 2.0


def test_log_integrability_criterion():
    levels = [4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0]
    div = log_integral_partials(-1.0, -0.75, levels)
    conv = log_integral_partials(-1.0, -2.0, levels)
    # ∫ s^{-3/4} ds grows like L^{1/4}; ∫ s^{-2} ds tends to 1/log 2
    assert all(b - a > 0.1 for a, b in zip(div, div[1:]))
    assert conv[-1] == pytest.approx(1 / math.log(2) - 1 / 4096.0, rel=1e-8)


def test_witness_is_positive_and_smooth():
    w = Field.axial(witness())
    x = np.linspace(0, 1, 201)
    assert np.all(w(x) >= 0)
    assert w.k_max >= 3
