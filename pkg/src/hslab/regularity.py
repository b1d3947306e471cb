"""Elliptic and parabolic regularity checks and the weak semigroup action."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .axial import Antiderivative, Dilated, GaussPoly
from .errors import InvalidParameter, TimeStepNotConverged
from .fields import Field, SpaceParams, Term, multi_indices
from .kernels import _is_dirichlet
from .norms import homogeneous_sobolev_norm, space_norm, tangential_rule, weighted_lp_norm
from .quadrature import DEFAULT_QUAD, QuadratureSpec, gauss_jacobi_unit, gauss_legendre, integrate_half_line
from .semigroup import apply_semigroup, fit_exponent, witness
from .spectral import oracle_function_calculus, resolve_green

# ----------------------------------------------------------------- rates


@dataclass(frozen=True)
class RateFunction:
    """Growth of elliptic constants in lam: kind 'g' (k, gamma) or 'h' (k, gamma, eps)."""

    kind: str
    p: float
    k: int
    gamma: float
    eps: float = 0.1
    bc: str = "dirichlet"

    def exponent(self) -> float:
        """s with rate ~ |lam|^{-s} as lam -> 0."""
        p, k, g = self.p, self.k, self.gamma
        if self.kind == "g":
            kk = k if _is_dirichlet(self.bc) else k + 1  # Neumann lives one order higher
            if -1 < g < p - 1:
                return max(kk - 1, 0) / 2.0
            if p - 1 < g < 2 * p - 1:
                return kk / 2.0
            raise InvalidParameter("g is defined for gamma in (-1, 2p-1) without p-1")
        if self.kind == "h":
            ge = g + k * p
            if -1 < ge < 2 * p - 1:
                return 0.0
            return (ge - 2 * p + 1 + self.eps) / (2 * p)
        raise InvalidParameter(f"unknown rate kind {self.kind!r}")

    def __call__(self, lam) -> np.ndarray:
        a = np.abs(np.asarray(lam, dtype=complex))
        s = self.exponent()
        if self.kind == "h" and s == 0.0:
            return np.ones_like(a)
        return 1.0 + a ** (-s)


# ----------------------------------------------------------------- elliptic


def elliptic_solve(bc: str, lam, f: Field, method: str = "images") -> Field:
    """u with lam u - Δu = f and the boundary condition of bc.

    ``images`` uses the reflected Green kernel (any d via plane waves);
    ``transform`` uses the sine/cosine multiplier 1/(lam + ξ²) (d = 1).
    """
    lam = complex(lam)
    if method == "images":
        return resolve_green(bc, lam, f)
    if method == "transform":
        if f.d != 1:
            raise InvalidParameter("transform method is one-dimensional")
        return oracle_function_calculus(bc, lambda s: 1.0 / (lam + s), 0.0, f)
    raise InvalidParameter(f"unknown method {method!r}")


def _beta_sum(u: Field, lam: complex, norm) -> float:
    total = 0.0
    a = abs(lam)
    for order in range(3):
        for b in multi_indices(u.d, order):
            v = u.derivative(b) if order else u
            total += a ** (1 - order / 2) * norm(v)
    return total


@dataclass(frozen=True)
class EllipticResidual:
    pde: float      # max |lam u - Δu - f| / max |f| at the probes
    trace: float    # |u(0)| (Dirichlet) or |∂_1 u(0)| (Neumann) relative to max |u|


def fd_operator_residual(u: Field, mu, rhs: Field, probes=None, h: float = 2e-3) -> float:
    """max |mu u - Δu - rhs| / max |rhs| with ∂_1² taken by fourth-order differences.

    Solvers may build ∂_1² u from the equation itself, so the normal second
    derivative is recomputed from values of u only.
    """
    mu = complex(mu)
    probes = np.linspace(0.1, 6.0, 41) if probes is None else np.asarray(probes, dtype=float)
    d = u.d
    xt = np.zeros((1, d - 1)) if d > 1 else None
    st = [u.grid(probes + j * h, xt) for j in (-2, -1, 0, 1, 2)]
    d11 = (-st[0] + 16 * st[1] - 30 * st[2] + 16 * st[3] - st[4]) / (12 * h * h)
    lap = d11
    for j in range(1, d):
        e = [0] * d
        e[j] = 2
        lap = lap + u.grid(probes, xt, tuple(e))
    r = rhs.grid(probes, xt)
    res = mu * st[2] - lap - r
    return float(np.max(np.abs(res))) / max(float(np.max(np.abs(r))), 1e-300)


@dataclass(frozen=True)
class EllipticResidual:
    pde: float      # relative residual of lam u - Δu = f, see fd_operator_residual
    trace: float    # |u(0)| (Dirichlet) or |∂_1 u(0)| (Neumann) relative to max |u|


def elliptic_residual(bc: str, lam, f: Field, u: Field, probes=None) -> EllipticResidual:
    """PDE residual and boundary trace of a computed solution."""
    probes = np.linspace(0.1, 6.0, 41) if probes is None else np.asarray(probes, dtype=float)
    xt = np.zeros((1, f.d - 1)) if f.d > 1 else None
    b = u if _is_dirichlet(bc) else u.derivative((1,) + (0,) * (f.d - 1))
    umax = max(float(np.max(np.abs(u.grid(probes, xt)))), 1e-300)
    trace = float(np.max(np.abs(b.grid(np.zeros(1), xt)))) / umax
    return EllipticResidual(fd_operator_residual(u, lam, f, probes), trace)


@dataclass(frozen=True)
class EllipticTable:
    rows: dict              # (arg, |lam|, field index) -> ratio
    envelope: dict          # (arg, |lam|) -> max ratio over the battery
    rate: RateFunction
    constant: float         # observed max of envelope / g
    declared_constant: float
    growth_exponent: float | None   # max over rays of s with envelope ~ |lam|^{-s}, |lam| <= 1
    h_exponent: float
    rotation_ratio: float   # max over |lam| of the envelope spread across rays

    @property
    def bounded(self) -> bool:
        return self.constant <= self.declared_constant


def elliptic_regularity_check(bc: str, sp: SpaceParams, lam_abs=None, args=(0.0, 3 * math.pi / 4),
                              battery=None, declared_constant: float = 20.0, eps: float = 0.1,
                              quad: QuadratureSpec | None = None) -> EllipticTable:
    """Σ_{|β|<=2} |lam|^{1-|β|/2} ‖∂^β u‖ / ‖f‖ in the state-space norm versus C g(lam).

    The small-|lam| growth exponent is fitted on the battery envelope of each
    ray over |lam| <= 1 and compared with the h-rate exponent.
    """
    sp.require_norm()
    lam_abs = np.geomspace(1e-2, 1e2, 17) if lam_abs is None else np.asarray(lam_abs, dtype=float)
    battery = [Field.axial(witness()), Field.axial(Dilated(witness(), 0.5))] if battery is None else battery

    def norm(v):
        return space_norm(v, sp, bc, quad)

    g = RateFunction("g", sp.p, sp.k, sp.gamma, eps, bc)
    h = RateFunction("h", sp.p, sp.k, sp.gamma, eps, bc)
    fn = [norm(f) for f in battery]
    rows, env = {}, {}
    for arg in args:
        for r in lam_abs:
            lam = r * cmath.exp(1j * arg)
            best = 0.0
            for i, f in enumerate(battery):
                u = elliptic_solve(bc, lam, f)
                val = _beta_sum(u, lam, norm) / fn[i]
                rows[(arg, float(r), i)] = val
                best = max(best, val)
            env[(arg, float(r))] = best
    observed = max(v / float(g(r)) for (a, r), v in env.items())
    growth = None
    for arg in args:
        small = sorted((r, v) for (a, r), v in env.items() if a == arg and r <= 1.0)
        if len(small) >= 8:
            rs, vs = zip(*small)
            s = -fit_exponent(rs, vs, r2_min=None).slope
            growth = s if growth is None else max(growth, s)
    spread = 1.0
    for r in lam_abs:
        vals = [env[(a, float(r))] for a in args]
        spread = max(spread, max(vals) / min(vals))
    return EllipticTable(rows, env, g, observed, declared_constant, growth, h.exponent(), spread)


@dataclass(frozen=True)
class ScalingRow:
    r: float
    residual: float          # r²λ u_r - Δu_r - r² f_r relative to r² f_r, pointwise
    solve_gap: float         # dilated solution vs an independent solve of the scaled problem
    ratio: float             # homogeneous regularity ratio


def homogeneous_scaling_check(bc: str, sp: SpaceParams, r_set=(1.0, 2.0, 4.0, 8.0), lam=1.0,
                              f: Field | None = None, quad: QuadratureSpec | None = None) -> list:
    """Dilation identities behind homogeneous elliptic regularity."""
    from .norms import weighted_lp_norm

    lam = complex(lam)
    f = Field.axial(GaussPoly((0.0, 1.0), 1.0)) if f is None else f
    u = elliptic_solve(bc, lam, f)
    ge = sp.effective_gamma
    hsp = SpaceParams(sp.p, sp.k, sp.gamma, f.d)
    out = []
    for r in r_set:
        ur, fr = u.dilate(r), f.dilate(r)
        rhs = (r * r) * fr
        residual = fd_operator_residual(ur, r * r * lam, rhs, np.linspace(0.1, 6.0, 41) / r, 2e-3 / r)
        direct = elliptic_solve(bc, r * r * lam, rhs)
        gap = weighted_lp_norm(direct - ur, sp.p, ge, quad) / weighted_lp_norm(ur, sp.p, ge, quad)
        ratio = _beta_sum(direct, r * r * lam, lambda v: homogeneous_sobolev_norm(v, hsp, quad)) / \
            homogeneous_sobolev_norm(rhs, hsp, quad)
        out.append(ScalingRow(float(r), residual, gap, ratio))
    return out


# ----------------------------------------------------------------- parabolic


@dataclass(frozen=True)
class TimeWeight:
    """v(t) = t^eta on (0, T).

    t^eta is an A_q weight for -1 < eta < q - 1. The endpoint eta = q - 1 is
    accepted for refinement-stability checks; ``in_aq`` tells the two apart.
    """

    eta: float
    q: float

    def __post_init__(self):
        if not self.q > 1:
            raise InvalidParameter("q must exceed 1")
        if not -1 < self.eta <= self.q - 1:
            raise InvalidParameter(f"eta={self.eta} outside (-1, q-1]")

    @property
    def in_aq(self) -> bool:
        return self.eta < self.q - 1


@dataclass(frozen=True)
class ExpSource:
    """f(t, x) = Σ_i e^{-a_i t} φ_i(x)."""

    items: tuple  # (rate, Field)

    @property
    def d(self) -> int:
        return self.items[0][1].d if self.items else 1

    def at(self, t: float) -> Field:
        return _combine([(math.exp(-a * t), phi) for a, phi in self.items], self.d)

    def integral(self, t: float) -> Field:
        """∫_0^t f(s) ds."""
        return _combine([(_int_exp(a, t), phi) for a, phi in self.items], self.d)


def _int_exp(a: float, t: float) -> float:
    return t if a == 0 else -math.expm1(-a * t) / a


def _combine(pairs, d) -> Field:
    terms = []
    for c, phi in pairs:
        if c != 0:
            terms.extend(Term(c * t.coef, t.axial, t.tang) for t in phi.terms)
    return Field(d, tuple(terms))


def _sigma_rule(t: float, n: int, levels: int = 6):
    """Gauss-Legendre panels on (0, t) graded geometrically toward 0."""
    br = np.concatenate(([0.0], t * 2.0 ** -np.arange(levels, -1, -1, dtype=float)))
    x, w = gauss_legendre(n)
    a, b = br[:-1], br[1:]
    s = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * x[None, :]
    ws = (0.5 * (b - a))[:, None] * w[None, :]
    return s.ravel(), ws.ravel()


@dataclass(frozen=True)
class DuhamelState:
    t: float
    u: Field
    dt_u: Field
    lap_u: Field
    integrated_residual_field: Field = field(repr=False)


def _duhamel_at(bc, src: ExpSource, t: float, n: int, quad) -> DuhamelState:
    d = src.d
    if t == 0:
        z = Field.zero(d)
        return DuhamelState(0.0, z, src.at(0.0), z, z)
    s, w = _sigma_rule(t, n)
    u_terms, du_terms, int_terms = [], [], []
    for a, phi in src.items:
        for sj, wj in zip(s, w):
            Tphi = apply_semigroup(bc, sj, phi, quad, certify=False)
            c = wj * math.exp(-a * (t - sj))
            u_terms.extend(Term(c * q.coef, q.axial, q.tang) for q in Tphi.terms)
            du_terms.extend(Term(-a * c * q.coef, q.axial, q.tang) for q in Tphi.terms)
            ci = wj * _int_exp(a, t - sj)
            int_terms.extend(Term(ci * q.coef, q.axial, q.tang) for q in Tphi.terms)
        Tt = apply_semigroup(bc, t, phi, quad, certify=False)
        du_terms.extend(Term(q.coef, q.axial, q.tang) for q in Tt.terms)
    u = Field(d, tuple(u_terms))
    # ∂_t u(t) = T(t) f(0) + ∫_0^t T(σ) ∂_t f(t-σ) dσ
    du = Field(d, tuple(du_terms))
    # ∫_0^t Δu(s) ds = ∫_0^t (∫_0^{t-σ} e^{-a r} dr) Δ T(σ) φ dσ
    lap_int = Field(d, tuple(int_terms)).laplacian()
    resid = u - lap_int - src.integral(t)
    return DuhamelState(t, u, du, u.laplacian(), resid)


@dataclass(frozen=True)
class DuhamelSolution:
    states: tuple
    n_sigma: int
    refinement_gap: float


def duhamel_solve(bc: str, src: ExpSource, t_grid, quad: QuadratureSpec | None = None,
                  n_sigma: int = 12, tol: float = 1e-8, probes=None) -> DuhamelSolution:
    """u(t) = ∫_0^t T(t-s) f(s) ds at the grid times with ∂_t u and Δu.

    The σ = t - s integral uses Gauss-Legendre panels graded toward σ = 0;
    the result is compared with doubled node counts at probe points.
    """
    quad = quad or DEFAULT_QUAD
    t_grid = [float(t) for t in t_grid]
    if any(t < 0 for t in t_grid):
        raise InvalidParameter("times must be >= 0")
    states = tuple(_duhamel_at(bc, src, t, n_sigma, quad) for t in t_grid)
    probes = np.linspace(0.05, 3.0, 7) if probes is None else np.asarray(probes, dtype=float)
    gap = 0.0
    tmax = max(t_grid) if t_grid else 0.0
    if tmax > 0 and src.items:
        fine = _duhamel_at(bc, src, tmax, 2 * n_sigma, quad)
        coarse = states[t_grid.index(tmax)]
        xt = np.zeros((1, src.d - 1)) if src.d > 1 else None
        a = coarse.u.grid(probes, xt)
        b = fine.u.grid(probes, xt)
        gap = float(np.max(np.abs(a - b))) / max(float(np.max(np.abs(b))), 1e-300)
        if gap > tol:
            raise TimeStepNotConverged(f"doubling σ nodes changed u by {gap:.2e}")
    return DuhamelSolution(states, n_sigma, gap)


@dataclass(frozen=True)
class MaxRegRow:
    n_time: int
    ratio: float
    dt_norm: float
    lap_norm: float
    f_norm: float


def _time_norm(values, weights, q):
    return float(np.sum(weights * np.asarray(values) ** q)) ** (1.0 / q)


def maximal_regularity_ratio(bc: str, sp: SpaceParams, tw: TimeWeight, T: float, src: ExpSource,
                             n_time: int = 4, n_sigma: int = 12, quad: QuadratureSpec | None = None) -> MaxRegRow:
    """(‖∂_t u‖ + ‖Δu‖)_{L^q(v; X)} / ‖f‖_{L^q(v; X)} with X the state space of (p, k, gamma).

    Time integrals use Gauss-Jacobi nodes for t^eta on (0, T). Δu is taken
    as ∂_t u - f; the integrated equation is checked by duhamel_solve.
    """
    quad = quad or DEFAULT_QUAD
    x, w = gauss_jacobi_unit(n_time, tw.eta)
    ts, wt = T * x, T ** (tw.eta + 1) * w

    def norm(v):
        return space_norm(v, sp, bc, quad)

    dts, laps, fs = [], [], []
    for t in ts:
        st = _duhamel_at(bc, src, float(t), n_sigma, quad)
        ft = src.at(float(t))
        dts.append(norm(st.dt_u))
        laps.append(norm(st.dt_u - ft))
        fs.append(norm(ft))
    fnorm = _time_norm(fs, wt, tw.q)
    a, b = _time_norm(dts, wt, tw.q), _time_norm(laps, wt, tw.q)
    ratio = (a + b) / fnorm if fnorm > 0 else 0.0
    return MaxRegRow(n_time, ratio, a, b, fnorm)


def maximal_regularity_check(bc: str, sp: SpaceParams, tw: TimeWeight, T: float, battery,
                             n_time: int = 4, quad: QuadratureSpec | None = None) -> dict:
    """Ratios at a base resolution and with time nodes, σ nodes and space quadrature refined.

    Returns {battery index: (base row, refined row)}.
    """
    quad = quad or DEFAULT_QUAD
    out = {}
    for i, src in enumerate(battery):
        base = maximal_regularity_ratio(bc, sp, tw, T, src, n_time, 6, quad)
        fine = maximal_regularity_ratio(bc, sp, tw, T, src, 2 * n_time, 12, quad.refined(2))
        out[i] = (base, fine)
    return out


# ----------------------------------------------------------------- weak setting


@dataclass(frozen=True)
class WeakDatum:
    """f = f_0 + Σ_j ∂_j f_j, components on the half-space."""

    components: tuple

    def __post_init__(self):
        if len(self.components) < 2:
            raise InvalidParameter("need f_0 and f_1 at least")
        d = len(self.components) - 1
        for c in self.components:
            if c is not None and c.d != d:
                raise InvalidParameter("component dimension must equal len(components) - 1")

    @property
    def d(self) -> int:
        return len(self.components) - 1

    def component(self, j: int) -> Field:
        c = self.components[j]
        return Field.zero(self.d) if c is None else c


def pairing(u: Field, v: Field, quad: QuadratureSpec | None = None, window: float | None = None) -> complex:
    """∫_{half-space} u v dx (bilinear)."""
    quad = quad or DEFAULT_QUAD
    if not u.terms or not v.terms:
        return 0.0
    ext = min(u.extent, v.extent)
    r = max(quad.r_max, ext) if np.isfinite(ext) else quad.r_max
    bps = tuple(sorted(set(u.breakpoints) | set(v.breakpoints)))
    scale = min(u.scale, v.scale)
    graded = u.graded or v.graded
    if u.d == 1:
        def g(x):
            return u(x) * v(x)
    else:
        W = window if window is not None else min(u.tangential_extent, v.tangential_extent)
        pts, wts = tangential_rule(u if np.isfinite(u.tangential_extent) else v, quad, W)

        def g(x):
            return (u.grid(x, pts) * v.grid(x, pts)) @ wts
    re = integrate_half_line(lambda x: np.real(g(x)), 0.0, quad, r, bps, scale, graded)
    im = integrate_half_line(lambda x: np.imag(g(x)), 0.0, quad, r, bps, scale, graded)
    return complex(re, im) if im != 0 else re


def weak_setting_apply(z, wd: WeakDatum, phi: Field, quad: QuadratureSpec | None = None) -> complex:
    """(T_Dir(z) f)(φ) = <T_Dir f_0, φ> - <T_Neu f_1, ∂_1 φ> - Σ_{j>=2} <T_Dir f_j, ∂_j φ>."""
    d = wd.d
    total = 0.0
    f0 = wd.component(0)
    if f0.terms:
        total += pairing(apply_semigroup("dirichlet", z, f0, quad), phi, quad)
    for j in range(1, d + 1):
        fj = wd.component(j)
        if not fj.terms:
            continue
        e = [0] * d
        e[j - 1] = 1
        bc = "neumann" if j == 1 else "dirichlet"
        total -= pairing(apply_semigroup(bc, z, fj, quad), phi.derivative(tuple(e)), quad)
    return total


def antiderivative_split(g: Field) -> WeakDatum:
    """The representation (g - ∂_1 G, G) of g with G(x) = ∫_0^{x_1} g."""
    if g.d != 1:
        raise InvalidParameter("split implemented for d = 1")
    G = Field(1, tuple(Term(t.coef, Antiderivative(t.axial), None) for t in g.terms))
    return WeakDatum((g - G.derivative((1,)), G))


def representation_norm(wd: WeakDatum, p: float, gamma: float, quad: QuadratureSpec | None = None,
                        window: float | None = None) -> float:
    """Σ_j ‖f_j‖_{L^p(w_gamma)}: an upper bound for the W^{-1,p} norm, not the infimum."""
    return sum(weighted_lp_norm(wd.component(j), p, gamma, quad, None, window) for j in range(wd.d + 1))
