"""Resolvents through the rotated Laplace transform and sectoriality scans."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .axial import Dilated
from .errors import ContourNotConverged, InvalidParameter, SectorViolation
from .fields import Field, SpaceParams, Term
from .norms import space_norm
from .quadrature import DEFAULT_QUAD, QuadratureSpec, gauss_legendre
from .semigroup import apply_semigroup, fit_exponent, witness
from .spectral import resolve_green

_MAX_ROT = 1.2  # largest rotation of the time ray, radians


@dataclass(frozen=True)
class SectorSample:
    """A spectral point lam for (lam - Δ)^{-1} with |arg lam| <= π - omega."""

    value: complex
    omega: float = math.pi / 8

    def __post_init__(self):
        v = complex(self.value)
        if v == 0:
            raise SectorViolation("lam = 0 is not in the resolvent set")
        if abs(cmath.phase(v)) > math.pi - self.omega + 1e-12:
            raise SectorViolation(f"|arg lam| = {abs(cmath.phase(v)):.4f} exceeds π - omega")


def _laplace_field(bc, mu, f, quad, n_panel, s_min, s_max):
    theta = max(-_MAX_ROT, min(_MAX_ROT, -cmath.phase(mu)))
    rot = cmath.exp(1j * theta)
    if (mu * rot).real <= 0.05 * abs(mu):
        raise SectorViolation(f"no admissible time ray for lam = {mu}")
    x, w = gauss_legendre(n_panel)
    u0, u1 = math.log(s_min), math.log(s_max)
    npan = max(1, math.ceil(u1 - u0))
    edges = np.linspace(u0, u1, npan + 1)
    # midpoint rule on (0, s_min) keeps boundary layers of data outside D(A)
    head = apply_semigroup(bc, 0.5 * s_min * rot, f, quad, certify=False)
    terms = [Term(t.coef * rot * s_min, t.axial, t.tang) for t in head.terms]
    for a, b in zip(edges[:-1], edges[1:]):
        us = 0.5 * (a + b) + 0.5 * (b - a) * x
        for u, wu in zip(us, 0.5 * (b - a) * w):
            s = math.exp(u)
            c = rot * wu * s * cmath.exp(-mu * rot * s)
            Tf = apply_semigroup(bc, s * rot, f, quad, certify=False)
            terms.extend(Term(c * t.coef, t.axial, t.tang) for t in Tf.terms)
    return Field(f.d, tuple(terms))


def resolvent_laplace(bc: str, lam, f: Field, quad: QuadratureSpec | None = None,
                      n_panel: int = 16, tol: float = 1e-8, certify: bool = True) -> Field:
    """(lam - Δ)^{-1} f = e^{iθ} ∫_0^∞ e^{-lam e^{iθ} s} T(s e^{iθ}) f ds.

    The ray angle θ is chosen so that lam e^{iθ} is as close to positive as
    the analytic sector allows. Nodes are Gauss-Legendre panels of unit
    width in log s on [s_min, s_max]; the piece below s_min uses the midpoint rule.
    """
    quad = quad or DEFAULT_QUAD
    lam = lam.value if isinstance(lam, SectorSample) else complex(lam)
    if lam == 0:
        raise SectorViolation("lam = 0 is not in the resolvent set")
    if not f.terms:
        return Field.zero(f.d)
    scale = abs(lam)
    theta = max(-_MAX_ROT, min(_MAX_ROT, -cmath.phase(lam)))
    decay = (lam * cmath.exp(1j * theta)).real
    s_min = 1e-9 / max(1.0, scale)
    s_max = 50.0 / max(decay, 1e-300)
    u = _laplace_field(bc, lam, f, quad, n_panel, s_min, s_max)
    if certify:
        ref = _laplace_field(bc, lam, f, quad, 2 * n_panel, s_min, 2 * s_max)
        hi = min(f.extent, 4.0) if np.isfinite(f.extent) else 4.0
        probes = np.linspace(0.05, max(hi, 0.1), 7)
        xt = np.zeros((1, f.d - 1)) if f.d > 1 else None
        a = u.grid(probes, xt) if f.d > 1 else u(probes)
        b = ref.grid(probes, xt) if f.d > 1 else ref(probes)
        err = float(np.max(np.abs(a - b))) / max(float(np.max(np.abs(b))), 1e-300)
        if err > tol:
            raise ContourNotConverged(f"Laplace quadrature changed by {err:.2e} under refinement")
    return u


def resolvent_green(bc: str, lam, lambda_shift: float, f: Field) -> Field:
    """R(lam, A) f for A = lambda_shift - Δ, i.e. -((lambda_shift - lam) - Δ)^{-1} f."""
    mu = complex(lambda_shift) - complex(lam)
    return -1.0 * resolve_green(bc, mu, f)


@dataclass(frozen=True)
class SectorialityReport:
    """Scan of |λ|·‖R(λ, A) f‖/‖f‖ over rays, A = lambda_shift - Δ."""

    table: dict          # (arg, |λ|) -> sup over the battery
    per_field: dict      # (arg, |λ|, field index) -> ratio
    variation: float     # max/min of the table
    sup: float           # max of the table
    small_lambda_exponent: float | None
    small_lambda_r2: float | None
    angle_bound: float
    lambda_shift: float


def default_battery() -> list:
    """Dilates of the boundary cutoff over two decades."""
    return [Field.axial(Dilated(witness(), s)) for s in (0.3, 1.0, 3.0)]


def sectoriality_scan(bc: str, sp: SpaceParams, lam_abs=None, rays=(math.pi / 2, 3 * math.pi / 4, math.pi),
                      battery=None, lambda_shift: float = 0.0, fit_ray: float | None = math.pi,
                      fit_abs=None, quad: QuadratureSpec | None = None) -> SectorialityReport:
    """Tabulate sup_f |λ|‖R(λ,A)f‖/‖f‖ on the rays and fit ‖R(λ)ζ‖ ~ |λ|^s for small |λ|.

    The fit uses ζ on the ray ``fit_ray`` at ``fit_abs`` (default 1e-4..1e-2).
    """
    sp.require_norm()
    lam_abs = np.geomspace(1e-2, 1e2, 9) if lam_abs is None else np.asarray(lam_abs, dtype=float)
    battery = default_battery() if battery is None else list(battery)
    if not battery:
        raise InvalidParameter("empty battery")
    fnorm = [space_norm(g, sp, bc, quad) for g in battery]
    table, per = {}, {}
    for arg in sorted(rays):
        for r in sorted(lam_abs):
            lam = r * cmath.exp(1j * arg)
            best = 0.0
            for i, g in enumerate(battery):
                u = resolvent_green(bc, lam, lambda_shift, g)
                val = r * space_norm(u, sp, bc, quad) / fnorm[i]
                per[(arg, float(r), i)] = val
                best = max(best, val)
            table[(arg, float(r))] = best
    vals = np.array(list(table.values()))
    variation = float(vals.max() / vals.min())
    slope = r2 = None
    if fit_ray is not None:
        fit_abs = np.geomspace(1e-4, 1e-2, 9) if fit_abs is None else np.asarray(fit_abs, dtype=float)
        z = Field.axial(witness())
        norms = [space_norm(resolvent_green(bc, r * cmath.exp(1j * fit_ray), lambda_shift, z), sp, bc, quad)
                 for r in fit_abs]
        fit = fit_exponent(fit_abs, norms, r2_min=None)
        slope, r2 = fit.slope, fit.r_squared
    return SectorialityReport(table, per, variation, float(vals.max()), slope, r2, float(min(rays)), lambda_shift)
