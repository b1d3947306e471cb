"""Holomorphic functional calculus of A = lambda_shift - Δ by contour quadrature."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .axial import INF, Axial, Combination
from .errors import ContourNotConverged, InvalidParameter, SymbolUnboundedOnContour
from .fields import Field, SpaceParams, Term
from .norms import space_norm
from .quadrature import gauss_legendre
from .spectral import GreenPlan

_SYMBOL_CAP = 1e12


@dataclass(frozen=True)
class ContourSpec:
    """Γ = ∂(Σ_nu \\ B(0, arc_radius)): upper ray inward, arc through +arc_radius,
    lower ray outward. Rays use Gauss-Legendre panels of unit width in log r."""

    nu: float = math.pi / 16
    arc_radius: float = 0.5
    r_max: float | None = None
    n_ray: int = 16
    n_arc: int = 16
    r_min: float = 1e-10

    def __post_init__(self):
        if not 0 < self.nu < math.pi / 2:
            raise InvalidParameter("nu must lie in (0, π/2)")
        if self.arc_radius < 0:
            raise InvalidParameter("arc_radius must be >= 0")

    def refined(self) -> "ContourSpec":
        return ContourSpec(self.nu, self.arc_radius, None if self.r_max is None else 2 * self.r_max,
                           2 * self.n_ray, 2 * self.n_arc, self.r_min)


@dataclass(frozen=True)
class HolomorphicSymbol:
    """A function holomorphic on a sector with declared behaviour at 0 and ∞.

    ``decay_inf`` is the power s with |φ(z)| <= C|z|^{-s} at ∞, or "exp" for
    exponential decay in Re z; ``decay_zero`` the power with |φ(z)| <= C|z|^{s}
    at 0. ``real`` means φ(conj z) = conj φ(z).
    """

    fn: Callable
    decay_inf: float | str = 0.0
    decay_zero: float = 0.0
    real: bool = True
    name: str = "phi"

    def __call__(self, z):
        return self.fn(z)

    def scaled(self, c: float) -> "HolomorphicSymbol":
        fn = self.fn
        return HolomorphicSymbol(lambda z: c * fn(z), self.decay_inf, self.decay_zero,
                                 self.real and np.isreal(c), f"{c}*{self.name}")

    def hinf_norm_estimate(self, omega: float, n_r: int = 241, n_arg: int = 33) -> float:
        """sup |φ| over a log-polar sample of the closed sector of half-angle omega."""
        r = np.geomspace(1e-8, 1e8, n_r)
        a = np.linspace(-omega, omega, n_arg)
        z = r[:, None] * np.exp(1j * a[None, :])
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.abs(self.fn(z))
        return float(np.nanmax(v))


def symbol_rational(a: float = 1.0) -> HolomorphicSymbol:
    """a z/(1 + a z)^2."""
    return HolomorphicSymbol(lambda z: a * z / (1 + a * z) ** 2, 1.0, 1.0, True, f"rat[{a}]")


def symbol_zexp() -> HolomorphicSymbol:
    """z e^{-z}."""
    return HolomorphicSymbol(lambda z: z * np.exp(-z), "exp", 1.0, True, "zexp")


def symbol_expdiff() -> HolomorphicSymbol:
    """e^{-z} - e^{-2z}."""
    return HolomorphicSymbol(lambda z: np.exp(-z) - np.exp(-2 * z), "exp", 1.0, True, "expdiff")


def symbol_one() -> HolomorphicSymbol:
    return HolomorphicSymbol(lambda z: np.ones_like(np.asarray(z, dtype=complex)), 0.0, 0.0, True, "one")


@dataclass(frozen=True, eq=False)
class ContourResolved(Axial):
    """x ↦ Σ_j c_j ((mu_j + shift) - d²/dx²)^{-1} base, a lazy contour sum."""

    base: Axial
    mus: tuple
    coefs: tuple
    bc: str
    shift: float = 0.0
    take_real: bool = False

    @property
    def k_max(self):
        return self.base.k_max + 2

    @property
    def support(self):
        return (0.0, INF)

    @property
    def breakpoints(self):
        return self.base.breakpoints

    @property
    def scale(self):
        return self.base.scale

    @property
    def is_real(self):
        return self.take_real

    @property
    def extent(self):
        hi = min(self.base.extent, self.base.support[1])
        kmin = min(cmath.sqrt(m + self.shift).real for m in self.mus)
        return hi + 40.0 / kmin if np.isfinite(hi) else INF

    def _eval(self, x, n):
        out = np.zeros(x.shape, dtype=complex)
        plan = GreenPlan(self.base, x)
        for mu, c in zip(self.mus, self.coefs):
            out += c * plan.solve(mu + self.shift, self.bc, n)
        return 2.0 * out.real if self.take_real else out


def _ray_nodes(r0, r1, n):
    x, w = gauss_legendre(n)
    u0, u1 = math.log(r0), math.log(r1)
    edges = np.linspace(u0, u1, max(1, math.ceil(u1 - u0)) + 1)
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * x
        rs.append(np.exp(u))
        ws.append(0.5 * (b - a) * w * np.exp(u))
    return np.concatenate(rs), np.concatenate(ws)


def _radii(phi: HolomorphicSymbol, c: ContourSpec, m: int):
    tiny = 1e-10
    if c.r_max is not None:
        r_max = c.r_max
    elif phi.decay_inf == "exp":
        r_max = 45.0 / math.cos(c.nu)
    else:
        s = float(phi.decay_inf) + m
        if s <= 0:
            raise ContourNotConverged("symbol does not decay at ∞; use regularization m >= 1")
        r_max = tiny ** (-1.0 / s)
    if c.arc_radius > 0:
        return c.arc_radius, r_max
    s0 = phi.decay_zero
    if s0 <= 0:
        raise ContourNotConverged("arc_radius = 0 needs a symbol vanishing at 0")
    return max(c.r_min, tiny ** (1.0 / s0)), r_max


def contour_nodes(phi: HolomorphicSymbol, contour: ContourSpec, m: int = 0, lambda_shift: float = 0.0):
    """Nodes z_j and weights so that ψ(A) g ≈ Σ_j w_j ψ(z_j) R(z_j, A) g, ψ = φ/(1+z)^m.

    Only the upper half of the contour is returned when the symbol is real;
    the lower half contributes the complex conjugate.
    """
    r0, r1 = _radii(phi, contour, m)
    nu, dlt = contour.nu, contour.arc_radius
    if dlt > 0 and not dlt < lambda_shift:
        raise InvalidParameter("arc radius must be below lambda_shift so B(0, δ) avoids the spectrum")
    r, wr = _ray_nodes(r0, r1, contour.n_ray)
    e = cmath.exp(1j * nu)
    zs = [r * e]
    ws = [-wr * e]  # upper ray traversed inward
    x, w = gauss_legendre(contour.n_arc)
    if dlt > 0:
        if phi.real:
            th = 0.5 * nu * (x + 1)  # angles in (0, nu), the arc's upper half
            wth = 0.5 * nu * w
        else:
            th = nu * x
            wth = nu * w
        za = dlt * np.exp(1j * th)
        zs.append(za)
        ws.append(-1j * za * wth)  # arc traversed clockwise from nu to -nu
    if not phi.real:
        zs.append(r * np.conj(e))
        ws.append(wr * np.conj(e))  # lower ray outward
    z = np.concatenate(zs)
    wt = np.concatenate(ws) / (2j * math.pi)
    return z, wt


def _regularize(f: Field, m: int, lambda_shift: float) -> Field:
    g = f
    for _ in range(m):
        g = (1.0 + lambda_shift) * g - g.laplacian()
    return g


def hinf_apply(bc: str, phi: HolomorphicSymbol, contour: ContourSpec, lambda_shift: float, f: Field,
               m: int | None = None, certify: bool = True, tol: float = 1e-7) -> Field:
    """φ(A) f for A = lambda_shift - Δ by the Cauchy integral over Γ.

    With ``m`` > 0 the integrand is φ(z)(1+z)^{-m} R(z, A) (1+A)^m f, which
    needs f in D(A^m) (boundary conditions of Δ^j f for j < m). The default m
    is 0 for exponentially decaying symbols and 2 otherwise.
    """
    if m is None:
        m = 0 if phi.decay_inf == "exp" else 2
    if not f.terms:
        return Field.zero(f.d)
    z, wt = contour_nodes(phi, contour, m, lambda_shift)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(phi(z), dtype=complex) / (1 + z) ** m
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > _SYMBOL_CAP:
        raise SymbolUnboundedOnContour(f"|φ| reaches {np.nanmax(np.abs(vals)):.3e} on the contour")
    # R(z, A) g = -((lambda_shift - z) - Δ)^{-1} g
    mus = tuple(complex(lambda_shift) - z)
    coefs = tuple(-wt * vals)
    g = _regularize(f, m, lambda_shift)
    take_real = phi.real and g.is_real
    if phi.real and not g.is_real:
        raise InvalidParameter("real symbols use the conjugate half-contour; pass real data")
    terms = []
    axial_only = [(t.coef, t.axial) for t in g.terms if t.tang is None]
    if axial_only:
        base = axial_only[0][1] if len(axial_only) == 1 and axial_only[0][0] == 1 else Combination(tuple(axial_only))
        terms.append(Term(1.0, ContourResolved(base, mus, coefs, bc, 0.0, take_real), None))
    for t in g.terms:
        if t.tang is None:
            continue
        else:
            waves = [t.tang] if hasattr(t.tang, "eta2") else t.tang.waves()
            for wb in waves:
                terms.append(Term(t.coef, ContourResolved(t.axial, mus, coefs, bc, wb.eta2, take_real), wb))
    out = Field(f.d, tuple(terms))
    if certify:
        ref = hinf_apply(bc, phi, contour.refined(), lambda_shift, f, m, certify=False)
        hi = min(f.extent, 4.0) if np.isfinite(f.extent) else 4.0
        probes = np.linspace(0.05, max(hi, 0.1), 5)
        xt = np.zeros((1, f.d - 1)) if f.d > 1 else None
        a = out.grid(probes, xt) if f.d > 1 else out(probes)
        b = ref.grid(probes, xt) if f.d > 1 else ref(probes)
        err = float(np.max(np.abs(a - b))) / max(float(np.max(np.abs(b))), 1e-300)
        if err > tol:
            raise ContourNotConverged(f"contour refinement changed the value by {err:.2e}")
    return out


@dataclass(frozen=True)
class BoundProbe:
    """Observed ratios ‖φ(A)f‖/(‖φ‖_∞ ‖f‖) keyed by (symbol, field index)."""

    ratios: dict
    max_ratio: float
    hinf_norms: dict
    lambda_shift: float


def hinf_bound_probe(bc: str, sp: SpaceParams, symbols, battery, lambda_shift: float = 1.0,
                     contour: ContourSpec | None = None, omega: float = math.pi / 8,
                     certify: bool = False, quad=None) -> BoundProbe:
    """Observed H∞ ratios in the state-space norm of (p, k, gamma)."""
    sp.require_norm()
    if contour is None:
        contour = ContourSpec(nu=omega / 2, arc_radius=0.5 * lambda_shift if lambda_shift > 0 else 0.0)
    if contour.nu >= omega:
        raise InvalidParameter("contour angle must be below omega")
    ratios, norms = {}, {}
    fn = [space_norm(f, sp, bc, quad) for f in battery]
    for phi in symbols:
        hn = phi.hinf_norm_estimate(omega)
        norms[phi.name] = hn
        for i, f in enumerate(battery):
            u = hinf_apply(bc, phi, contour, lambda_shift, f, certify=certify)
            ratios[(phi.name, i)] = space_norm(u, sp, bc, quad) / (hn * fn[i])
    return BoundProbe(ratios, max(ratios.values()), norms, lambda_shift)
