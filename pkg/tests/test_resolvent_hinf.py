import math

import numpy as np
import pytest

from conftest import exp_field, gauss_field, rel_err
from hslab.commutators import commutator_suite
from hslab.errors import InvalidParameter
from hslab.fields import Field, SpaceParams
from hslab.hinf import (ContourSpec, hinf_apply, hinf_bound_probe, symbol_expdiff, symbol_one, symbol_rational,
                        symbol_zexp)
from hslab.regularity import fd_operator_residual
from hslab.resolvent import resolvent_green, resolvent_laplace, sectoriality_scan
from hslab.semigroup import apply_semigroup
from hslab.spectral import oracle_function_calculus, resolve_green
from hslab.tangential import HermiteGauss

X = np.linspace(0.05, 6.0, 40)
ODD = gauss_field((0.0, 1.0))
EVEN = gauss_field((1.0,))


# resolvent by Laplace transform of the semigroup

def test_laplace_closed_form():
    u = resolvent_laplace("dirichlet", 1.0, exp_field())
    assert float(np.max(np.abs(u(X) - X / 2 * np.exp(-X)))) <= 1e-6


@pytest.mark.parametrize("lam", [1.0, 0.1, 1 + 1j])
def test_laplace_matches_green(bump, lam):
    u = resolvent_laplace("dirichlet", lam, bump)
    g = resolve_green("dirichlet", lam, bump)
    assert rel_err(u(X), g(X)) <= 1e-6
    assert fd_operator_residual(u, lam, bump) <= 1e-6


def test_shifted_green_resolvent(bump):
    # R(lam, A) = (lam - A)^{-1} with A = shift - Δ
    a = resolvent_green("neumann", 0.5, 1.0, bump)
    b = resolve_green("neumann", 0.5, bump)
    np.testing.assert_allclose(a(X), -b(X), rtol=1e-15)
    assert fd_operator_residual(a * -1.0, 0.5, bump) <= 1e-8


def test_d2_resolvent_residual(bump):
    u2 = Field.separable(bump.terms[0].axial, HermiteGauss((0,), 0.5))
    for bc in ("dirichlet", "neumann"):
        assert fd_operator_residual(resolve_green(bc, 1.0, u2), 1.0, u2) <= 1e-6


def test_sector_scan_bounded_regime():
    rep = sectoriality_scan("dirichlet", SpaceParams(2.0, 0, 1.5, 1), np.geomspace(1e-2, 1e2, 5),
                            rays=(3 * math.pi / 4,), fit_ray=None)
    assert math.isfinite(rep.sup)
    assert rep.variation <= 20.0


# H∞ calculus by contour integration

def test_identity_symbol():
    v = hinf_apply("dirichlet", symbol_one(), ContourSpec(arc_radius=0.5), 1.0, ODD)
    assert float(np.max(np.abs(v(X) - ODD(X)))) <= 1e-5


def test_rational_symbol_exactness():
    v = resolve_green("dirichlet", 2.0, ODD)
    ref = resolve_green("dirichlet", 2.0, v - v.laplacian())
    got = hinf_apply("dirichlet", symbol_rational(1.0), ContourSpec(arc_radius=0.5), 1.0, ODD)
    assert rel_err(got(X), ref(X)) <= 1e-5


def test_zexp_matches_semigroup_composition():
    got = hinf_apply("dirichlet", symbol_zexp(), ContourSpec(arc_radius=0.5), 1.0, ODD)(X)
    w = apply_semigroup("dirichlet", 1.0, ODD)
    ref = math.exp(-1) * (w(X) - w(X, alpha=(2,)))
    assert rel_err(got, ref) <= 1e-5


@pytest.mark.parametrize("bc, f", [("dirichlet", ODD), ("neumann", EVEN)])
def test_contour_matches_spectral_oracle(bc, f):
    ed = symbol_expdiff()
    got = hinf_apply(bc, ed, ContourSpec(arc_radius=0.5), 1.0, f)(X)
    ora = oracle_function_calculus(bc, ed.fn, 1.0, f)(X)
    assert rel_err(got, ora) <= 1e-5


def test_contour_invariance():
    rat = symbol_rational(1.0)
    a = hinf_apply("dirichlet", rat, ContourSpec(nu=math.pi / 16, arc_radius=0.5), 1.0, ODD)(X)
    b = hinf_apply("dirichlet", rat, ContourSpec(nu=1.2 * math.pi / 16, arc_radius=0.25), 1.0, ODD)(X)
    assert rel_err(b, a) <= 1e-5


def test_bound_probe_scaling_invariance(bump):
    sp = SpaceParams(2.0, 0, 0.5, 1)
    rat = symbol_rational(1.0)
    p1 = hinf_bound_probe("dirichlet", sp, [rat], [bump])
    p3 = hinf_bound_probe("dirichlet", sp, [rat.scaled(3.0)], [bump])
    assert p3.max_ratio == pytest.approx(p1.max_ratio, rel=1e-10)
    assert 0 < p1.max_ratio < 10


def test_bound_probe_identity_symbol():
    sp = SpaceParams(2.0, 0, 0.5, 1)
    pr = hinf_bound_probe("dirichlet", sp, [symbol_one()], [ODD])
    assert pr.max_ratio == pytest.approx(1.0, abs=1e-5)


def test_contour_guards():
    with pytest.raises(InvalidParameter):
        ContourSpec(nu=2.0)
    with pytest.raises(InvalidParameter):
        ContourSpec(arc_radius=-1.0)
    with pytest.raises(InvalidParameter):
        hinf_bound_probe("dirichlet", SpaceParams(2.0, 0, 0.5, 1), [symbol_one()], [ODD],
                         contour=ContourSpec(nu=math.pi / 4))


# commutators

@pytest.mark.parametrize("z", [1.0, 1 + 1j])
def test_commutators_d1(bump, z):
    for row in commutator_suite(z, bump):
        assert row.relative <= 1e-6, row.identity


def test_commutators_d2(bump):
    u = Field.separable(bump.terms[0].axial, HermiteGauss((0,), 0.5))
    rows = commutator_suite(1.0, u)
    assert any(r.identity.startswith("[d_2") for r in rows)
    for row in rows:
        assert row.relative <= 1e-6, row.identity


def test_commutator_negative_control():
    # e^{-x} has a nonzero trace, so Δ R_Dir u and R_Dir Δ u differ
    rows = {r.identity: r for r in commutator_suite(1.0, exp_field())}
    assert rows["[d_1^2, R_Dir]u"].relative > 0.1
