"""Weighted Lebesgue and Sobolev norms, Hardy checks, extensions and traces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import HypothesisViolated, InvalidParameter, NoTrace, NonIntegrableWeight
from .fields import Field, SpaceParams, multi_indices, multiply_power
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate_half_line, line_rule


def tangential_rule(f: Field, quad: QuadratureSpec, window: float | None = None):
    """Tensor Gauss-Legendre nodes/weights over [-X, X]^{d-1}."""
    X = f.tangential_extent if window is None else window
    if not np.isfinite(X):
        raise InvalidParameter("field does not decay tangentially; pass a tangential window")
    X = max(X, 1e-6)
    h = max(min(f.tangential_scale, X), X / 400)
    x, w = line_rule(0.0, X, h, quad.n_tangential)
    dim = f.d - 1
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wg = np.meshgrid(*([w] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
    return pts, wts


def _sign_changes(f: Field, alpha, r: float) -> tuple:
    """Breakpoints at and around zeros of a real d=1 profile on (0, r); |f|^p has a kink there."""
    n = int(min(20000, math.ceil(32 * r / min(f.scale, r))))
    bps = [b for b in f.breakpoints if 0 < b < r]
    x = np.unique(np.concatenate((np.linspace(1e-12 * r, r, n + 1), bps)))
    v = f(x, alpha=alpha)
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    roots = []
    for i in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        # ignore sign flips in the far tail where |f| is round-off
        if max(abs(v[i]), abs(v[i + 1])) > 1e-12 * scale:
            roots.append(brentq(lambda t: float(f(np.array([t]), alpha=alpha)[0]), x[i], x[i + 1], xtol=1e-15))
    # panels graded geometrically toward each zero resolve the |x - c|^p singularity
    out = []
    for c in roots:
        s = 0.5 * min(f.scale, c, *(abs(c - o) for o in roots if o != c))
        steps = s * 2.0 ** -np.arange(30)
        out += [c, *(c - steps), *(c + steps)]
    return tuple(out)


def _pointwise_power(f: Field, p: float, alpha, quad, window):
    if f.d == 1:
        return lambda x: np.abs(f(x, alpha=alpha)) ** p
    pts, wts = tangential_rule(f, quad, window)
    return lambda x: (np.abs(f.grid(x, pts, alpha)) ** p) @ wts


def lp_integral(f: Field, p: float, gamma: float, quad: QuadratureSpec | None = None,
                alpha=None, window: float | None = None) -> float:
    """∫ |∂^alpha f|^p x1^gamma dx."""
    quad = quad or DEFAULT_QUAD
    if gamma <= -1:
        raise NonIntegrableWeight(f"gamma={gamma} <= -1")
    if not f.terms:
        return 0.0
    alpha = tuple(alpha) if alpha is not None else (0,) * f.d
    theta = f.power_at_zero
    smooth = float(theta).is_integer() and theta >= 0
    if alpha[0]:
        theta = max(theta - alpha[0], 0.0) if smooth else theta - alpha[0]
    beta = gamma + p * theta
    if min(t.axial.support[0] for t in f.terms) > 0:
        beta = gamma  # the integrand vanishes near the boundary
    if quad.jacobi_exponent is not None:
        beta = quad.jacobi_exponent
    if beta <= -1:
        raise NonIntegrableWeight(f"|f|^p x^gamma behaves like x^{beta} at 0")
    r = max(quad.r_max, f.extent) if np.isfinite(f.extent) else quad.r_max
    g = _pointwise_power(f, p, alpha, quad, window)
    breaks = tuple(f.breakpoints)
    if f.d == 1 and f.is_real and not (float(p).is_integer() and p % 2 == 0):
        breaks += _sign_changes(f, alpha, min(r, f.extent))
    return integrate_half_line(g, gamma, quad, r, breaks, f.scale, f.graded, beta)


def weighted_lp_norm(f: Field, p: float, gamma: float, quad: QuadratureSpec | None = None,
                     alpha=None, window: float | None = None) -> float:
    """(∫ |f|^p w_gamma dx)^{1/p}."""
    if not p > 1 and p != 1:
        raise InvalidParameter("p must be >= 1")
    val = lp_integral(f, p, gamma, quad, alpha, window)
    return max(val, 0.0) ** (1.0 / p)


def _check_order(f: Field, k: int):
    from .errors import InsufficientDerivatives

    if f.terms and f.k_max < k:
        raise InsufficientDerivatives(f"field supplies order {f.k_max} < {k}")


def weighted_sobolev_norm(f: Field, sp: SpaceParams, quad: QuadratureSpec | None = None,
                          window: float | None = None) -> float:
    """Σ_{|α|≤k} ‖∂^α f‖_{L^p(w_gamma)} with gamma = sp.gamma."""
    _check_order(f, sp.k)
    total = 0.0
    for order in range(max(sp.k, 0) + 1):
        for a in multi_indices(f.d, order):
            total += weighted_lp_norm(f, sp.p, sp.gamma, quad, a, window)
    return total


def homogeneous_sobolev_norm(f: Field, sp: SpaceParams, quad: QuadratureSpec | None = None,
                             window: float | None = None) -> float:
    """Σ_{|α|≤k} ‖∂^α f‖_{L^p(w_{gamma+|α|p})}."""
    _check_order(f, sp.k)
    total = 0.0
    for order in range(max(sp.k, 0) + 1):
        for a in multi_indices(f.d, order):
            total += weighted_lp_norm(f, sp.p, sp.gamma + order * sp.p, quad, a, window)
    return total


def space_norm(f: Field, sp: SpaceParams, bc: str = "dirichlet", quad: QuadratureSpec | None = None,
               window: float | None = None) -> float:
    """Norm of the state space: W^{k,p}(w_{γ+kp}) (Dirichlet), W^{k+1,p}(w_{γ+kp}) (Neumann)."""
    k = sp.k + (1 if bc.lower().startswith("n") else 0)
    return weighted_sobolev_norm(f, SpaceParams(sp.p, k, sp.effective_gamma, f.d), quad, window)


@dataclass(frozen=True)
class HardyResult:
    lhs: float
    rhs: float
    ratio: float
    ceiling: float


def hardy_check(u: Field, p: float, gamma: float, quad: QuadratureSpec | None = None,
                enforce: bool = True, trace_tol: float = 1e-8) -> HardyResult:
    """lhs = ‖u‖_{L^p(w_{γ-p})}, rhs = ‖u'‖_{L^p(w_γ)}.

    With ``enforce`` the hypotheses are checked: gamma != p-1, and a vanishing
    trace when gamma < p-1. ``ceiling`` is the classical constant p/|γ-p+1|.
    """
    if u.d != 1:
        raise InvalidParameter("hardy_check takes one-dimensional fields")
    if enforce:
        if abs(gamma - (p - 1)) < 1e-12:
            raise HypothesisViolated("gamma = p-1 is excluded")
        if gamma < p - 1 and u.terms:
            tr = trace(u, 0, tol=math.inf)
            if abs(tr.value) > trace_tol:
                raise HypothesisViolated(f"gamma < p-1 needs Tr u = 0, got {tr.value:.3e}")
    if not u.terms:
        return HardyResult(0.0, 0.0, 0.0, p / abs(gamma - p + 1) if gamma != p - 1 else math.inf)
    lhs = weighted_lp_norm(multiply_power(u, -1.0), p, gamma, quad)
    rhs = weighted_lp_norm(u, p, gamma, quad, alpha=(1,))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    ceiling = p / abs(gamma - p + 1) if gamma != p - 1 else math.inf
    return HardyResult(lhs, rhs, ratio, ceiling)


@dataclass(frozen=True)
class Extension:
    """Odd or even reflection of a half-space field across {x1 = 0}."""

    f: Field
    parity: str

    def __post_init__(self):
        if self.parity not in ("odd", "even"):
            raise InvalidParameter("parity must be 'odd' or 'even'")

    def __call__(self, y1, xt=None, alpha=None):
        y1 = np.asarray(y1, dtype=float)
        alpha = tuple(alpha) if alpha is not None else (0,) * self.f.d
        sgn = np.where(y1 < 0, -1.0, 1.0)
        flip = sgn ** alpha[0]
        if self.parity == "odd":
            flip = flip * sgn
        return flip * self.f(np.abs(y1), xt, alpha)


def extend(f: Field, parity: str) -> Extension:
    return Extension(f, parity)


def full_line_lp_norm(E: Extension, p: float, gamma: float, quad: QuadratureSpec | None = None) -> float:
    """(∫_R |E f(y)|^p |y|^gamma dy)^{1/p} for d=1, both half-lines by quadrature."""
    quad = quad or DEFAULT_QUAD
    f = E.f
    if f.d != 1:
        raise InvalidParameter("full-line norm implemented for d=1")
    r = max(quad.r_max, f.extent) if np.isfinite(f.extent) else quad.r_max
    pos = integrate_half_line(lambda x: np.abs(E(x)) ** p, gamma, quad, r, f.breakpoints, f.scale, f.graded)
    neg = integrate_half_line(lambda x: np.abs(E(-x)) ** p, gamma, quad, r, f.breakpoints, f.scale, f.graded)
    return (pos + neg) ** (1.0 / p)


@dataclass(frozen=True)
class TraceValue:
    value: complex | np.ndarray
    order: int
    residual: float


def trace(f: Field, order: int = 0, xt=None, h: float = 1e-3, tol: float = 1e-8) -> TraceValue:
    """Limit of ∂1^order f(x1, xt) as x1 -> 0 by Richardson extrapolation.

    The limit uses x1 ∈ {h, h/2, h/4}; the residual compares it with the
    same extrapolant on {h/2, h/4, h/8}.
    """
    if order not in (0, 1):
        raise InvalidParameter("order must be 0 or 1")
    alpha = (order,) + (0,) * (f.d - 1)
    if f.terms and f.k_max < order + 1:
        from .errors import InsufficientDerivatives

        raise InsufficientDerivatives("trace needs k_max >= order + 1")
    if f.d > 1 and xt is None:
        xt = np.zeros((1, f.d - 1))
    hs = h / 2.0 ** np.arange(4)
    if f.d == 1:
        v = np.array([f(np.array([x]), alpha=alpha)[0] for x in hs])
    else:
        pts = np.atleast_2d(xt)
        v = np.array([f.grid(np.array([x]), pts, alpha)[0] for x in hs])

    def rich(a, b, c):
        r1 = 2 * b - a
        r1b = 2 * c - b
        return (4 * r1b - r1) / 3

    val = rich(v[0], v[1], v[2])
    alt = rich(v[1], v[2], v[3])
    res = float(np.max(np.abs(val - alt)))
    scale = max(1.0, float(np.max(np.abs(val))))
    if not np.all(np.isfinite(v)) or res > tol * scale:
        raise NoTrace(f"Richardson residual {res:.3e} exceeds {tol:.1e}")
    return TraceValue(val if np.ndim(val) else complex(val) if np.iscomplexobj(val) else float(val), order, res)
