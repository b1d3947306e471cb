"""Dirichlet and Neumann heat semigroups on the half-space by quadrature.

The axial factor of each separable term is convolved with the half-line
kernel; tangential factors evolve in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .axial import INF, Axial, LogPower, Power, Product, Step
from .errors import FitRejected, InvalidParameter, QuadratureDiverged
from .fields import Field, SpaceParams, Term
from .kernels import SectorTime, _is_dirichlet, as_time, heat_kernel_halfspace
from .norms import space_norm
from .quadrature import DEFAULT_QUAD, QuadratureSpec, panel_rule, refine_breaks

# e^{-45} below double precision relative to the kernel peak
_CUT = 45.0
_BLOCK = 256


def witness() -> Step:
    """Cutoff ζ: 1 on [0, 1/2], 0 on [3/4, ∞), order-7 smoothstep between."""
    return Step(0.5, 0.75)


@dataclass(frozen=True, eq=False)
class HeatEvolved(Axial):
    """x ↦ ∂^n ∫_0^∞ H_z(x, y) base(y) dy, evaluated lazily."""

    base: Axial
    z: complex
    bc: str
    n_conv: int = 16
    grading_levels: int = 40

    @property
    def _t(self):
        z = complex(self.z)
        return abs(z) / math.cos(math.atan2(z.imag, z.real))

    @property
    def k_max(self):
        return INF

    @property
    def support(self):
        return (0.0, INF)

    @property
    def breakpoints(self):
        return ()

    @property
    def is_real(self):
        return self.base.is_real and complex(self.z).imag == 0

    @property
    def scale(self):
        return math.sqrt(self.base.scale**2 + self._t) * math.cos(math.atan2(complex(self.z).imag, complex(self.z).real))

    def _cut(self, n=0):
        return math.sqrt(4 * self._t * (_CUT + 2 * n))

    @property
    def extent(self):
        hi = min(self.base.extent, self.base.support[1])
        return hi + self._cut() if np.isfinite(hi) else INF

    def _nodes(self, lo, hi, n, refine=1):
        z = complex(self.z)
        t = self._t
        rc = self._cut(n)
        wave = rc * abs(z.imag) / abs(z) ** 2
        hmax = min(0.7 * math.sqrt(2 * t), 6.0 / wave if wave > 0 else INF, self.base.scale) / refine
        pts = [lo, hi] + [b for b in self.base.breakpoints if lo < b < hi]
        if self.base.graded and lo <= 0.0:
            b0 = min([hi, hmax] + [b for b in self.base.breakpoints if b > 0])
            pts += list(b0 * 2.0 ** -np.arange(1, self.grading_levels * refine + 1))
        br = refine_breaks(sorted(set(pts)), hmax)
        # the geometric panels must not be merged by refinement
        return panel_rule(br, self.n_conv * refine)

    def evaluate(self, x, n=0, refine=1):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        order = np.argsort(flat, kind="stable")
        xs = flat[order]
        out = np.zeros(xs.size, dtype=complex)
        lo_b, hi_b = self.base.support
        hi_b = min(hi_b, self.base.extent)
        rc = self._cut(n)
        i = 0
        while i < xs.size:
            j = i + 1
            while j < xs.size and j - i < _BLOCK and xs[j] - xs[i] <= rc:
                j += 1
            xb = xs[i:j]
            lo = max(lo_b, xb[0] - rc, 0.0)
            hi = min(hi_b, xb[-1] + rc)
            if hi > lo:
                y, w = self._nodes(lo, hi, n, refine)
                fy = self.base(y, 0)
                K = heat_kernel_halfspace(self.z, xb[:, None], y[None, :], self.bc, n)
                out[i:j] = K @ (w * fy)
            i = j
        res = np.empty_like(out)
        res[order] = out
        res = res.reshape(x.shape)
        return res.real if self.is_real else res

    def _eval(self, x, n):
        return self.evaluate(x, n)

    def certify(self, probes, tol=1e-8):
        """Compare base and refined quadrature at probe points."""
        a = self.evaluate(probes, 0, 1)
        b = self.evaluate(probes, 0, 2)
        scale = max(float(np.max(np.abs(b))), 1e-300)
        err = float(np.max(np.abs(a - b))) / scale
        if not np.isfinite(err) or err > tol:
            raise QuadratureDiverged(f"refinement changed the convolution by {err:.2e} (relative)")
        return err


def apply_semigroup(bc: str, z, f: Field, quad: QuadratureSpec | None = None,
                    space: SpaceParams | None = None, certify: bool = True) -> Field:
    """T(z) f for the Dirichlet or Neumann heat semigroup.

    ``space`` only validates the declared (p, k, gamma) context; the result
    does not depend on it.
    """
    quad = quad or DEFAULT_QUAD
    zt = as_time(z)
    _is_dirichlet(bc)
    if space is not None:
        space.require_norm()
    terms = []
    for t in f.terms:
        ev = HeatEvolved(t.axial, complex(zt.z), bc, quad.n_conv, quad.grading_levels)
        if certify:
            hi = min(t.axial.extent, t.axial.support[1], 4.0)
            probes = np.linspace(0.05, max(hi, 0.1), 5) if np.isfinite(hi) else np.linspace(0.05, 4.0, 5)
            ev.certify(probes)
        tang = t.tang.evolve(complex(zt.z)) if t.tang is not None else None
        terms.append(Term(t.coef, ev, tang))
    return Field(f.d, tuple(terms))


def generator_residual(bc: str, f: Field, h: float, quad: QuadratureSpec | None = None,
                       p: float = 2.0, gamma: float = 0.0) -> float:
    """‖(T(h)f - f)/h - Δf‖_{L^p(w_gamma)}."""
    if not f.terms:
        return 0.0
    from .norms import weighted_lp_norm

    Tf = apply_semigroup(bc, h, f, quad)
    r = (1.0 / h) * Tf - (1.0 / h) * f - f.laplacian()
    return weighted_lp_norm(r, p, gamma, quad)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    t_window: tuple
    t: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)


def fit_exponent(t, values, min_points: int = 8, min_decades: float = 2.0, r2_min: float | None = 0.98) -> ExponentFit:
    """Least-squares fit of log(values) against log(t)."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < min_points:
        raise InvalidParameter(f"fit needs >= {min_points} points")
    if math.log10(t.max() / t.min()) < min_decades - 1e-9:
        raise InvalidParameter(f"fit needs >= {min_decades} decades")
    X, Y = np.log(t), np.log(v)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    if float(np.max(np.abs(resid))) <= 1e-9:
        r2 = 1.0  # the line reproduces the data to rounding
    else:
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    fit = ExponentFit(float(slope), float(intercept), r2, (float(t.min()), float(t.max())), tuple(t), tuple(v))
    if r2_min is not None and r2 < r2_min:
        raise FitRejected(f"r^2 = {r2:.4f} < {r2_min}")
    return fit


def growth_exponent(bc: str, sp: SpaceParams) -> float:
    """Exponent of t in the lower bound for ‖T(t)‖ (0 in the bounded regime)."""
    g = sp.effective_gamma
    p = sp.p
    if _is_dirichlet(bc):
        return max((g - 2 * p + 1) / (2 * p), 0.0)
    return max((g - p + 1) / (2 * p), 0.0)


def growth_experiment(bc: str, sp: SpaceParams, t_grid=None, quad: QuadratureSpec | None = None,
                      witness_mode: str = "auto", r2_min: float = 0.98) -> ExponentFit:
    """Fit the growth of the witness lower envelope of ‖T(t)‖.

    ``witness_mode``: "fixed" uses ‖T(t)ζ‖/‖ζ‖; "envelope" takes the larger
    of that and the same ratio for the dilate ζ(·/√t); "auto" picks "fixed"
    when the growth exponent is positive and "envelope" otherwise. In the
    bounded regime ‖T(t)ζ‖ decays while the dilate keeps the ratio constant.
    """
    if witness_mode == "auto":
        witness_mode = "fixed" if growth_exponent(bc, sp) > 0 else "envelope"
    if witness_mode not in ("fixed", "envelope"):
        raise InvalidParameter("witness_mode must be auto, fixed or envelope")
    dilated_witness = witness_mode == "envelope"
    quad = quad or DEFAULT_QUAD
    t_grid = np.geomspace(10.0, 1e4, 12) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 1):
        raise InvalidParameter("growth fits use t >= 1")
    z0 = witness()
    f0 = Field.axial(z0)
    n0 = space_norm(f0, sp, bc, quad)
    vals = []
    for t in t_grid:
        best = space_norm(apply_semigroup(bc, t, f0, quad, certify=False), sp, bc, quad) / n0
        if dilated_witness:
            fw = f0.dilate(1.0 / math.sqrt(t))
            nw = space_norm(fw, sp, bc, quad)
            best = max(best, space_norm(apply_semigroup(bc, t, fw, quad, certify=False), sp, bc, quad) / nw)
        vals.append(best)
    return fit_exponent(t_grid, vals, r2_min=r2_min)


# ---------------------------------------------------------------- blow-up probe


def blowup_input(bc: str, p: float) -> Field:
    """x^{-2}|log x|^{-(p+1)/(2p)} ζ (Dirichlet) or x^{-1}|log x|^{-(p+1)/(2p)} ζ (Neumann)."""
    theta = -2.0 if _is_dirichlet(bc) else -1.0
    a = (p + 1) / (2 * p)
    return Field.axial(Product((Power(theta), LogPower(-a), witness())))


def _log_power_derivative_coeffs(theta: float, b: float, j: int) -> dict:
    """d^j/dy^j [y^theta L^b] = y^{theta-j} Σ_m c_m L^{b-m}, L = -log y."""
    terms = {0: 1.0}
    e = theta
    for _ in range(j):
        nxt: dict = {}
        for m, c in terms.items():
            nxt[m] = nxt.get(m, 0.0) + e * c
            if b - m != 0:
                nxt[m + 1] = nxt.get(m + 1, 0.0) - (b - m) * c
        terms = nxt
        e -= 1
    return terms


@dataclass(frozen=True)
class BlowupResult:
    levels: tuple
    partials: tuple
    growth_ratios: tuple
    verdict: str
    membership_partials: tuple
    membership_converged: bool


def _gl_log_interval(s0: float, s1: float, g, n=16, width=0.5):
    """∫_{s0}^{s1} g(s) ds with s = e^v and Gauss-Legendre panels in v."""
    v0, v1 = math.log(s0), math.log(s1)
    m = max(1, int(math.ceil((v1 - v0) / width)))
    br = np.linspace(v0, v1, m + 1)
    v, w = panel_rule(br, n)
    s = np.exp(v)
    return float(np.sum(w * s * g(s)))


def blowup_probe(bc: str, p: float = 2.0, gamma: float | None = None, t: float = 1.0,
                 refinement_levels: int = 6, x_probe: float = 0.25, k: int = 0,
                 level_factor: float = 256.0, s0: float = 2.0) -> BlowupResult:
    """Partial values of T(t)f(x_probe) for the log-singular input.

    Level n truncates the input at y = exp(-s0 * level_factor^n); the
    singular part is integrated in s = -log y. Membership partial norms
    use the same truncations.
    """
    dirichlet = _is_dirichlet(bc)
    if gamma is None:
        gamma = 2 * p - 1 if dirichlet else p - 1
    if (dirichlet and gamma < 2 * p - 1) or (not dirichlet and gamma < p - 1):
        raise InvalidParameter("membership needs gamma >= 2p-1 (Dirichlet) or p-1 (Neumann)")
    if not 0 < x_probe < 0.5:
        raise InvalidParameter("x_probe must lie in (0, 1/2)")
    a = (p + 1) / (2 * p)
    theta = -2.0 if dirichlet else -1.0
    f = blowup_input(bc, p)
    zf = witness()
    x = x_probe

    def kernel_over_y(y):
        # H(x,y) * y^{-theta-1}: Dirichlet H/y, Neumann H
        y = np.asarray(y, dtype=float)
        from .kernels import gaussian_x_derivatives

        G = gaussian_x_derivatives(t, x - y, 0)[0].real
        if dirichlet:
            small = y < 1e-12
            ys = np.where(small, 1.0, y)
            q = G * (-np.expm1(-x * ys / t)) / ys
            return np.where(small, G * x / t, q)
        return G * (1.0 + np.exp(-x * y / t))

    def singular_integrand(s):
        y = np.exp(-s)
        return kernel_over_y(y) * s ** (-a) * zf(y)

    y_reg, w_reg = panel_rule(refine_breaks([math.exp(-s0), 0.5, 0.75], 0.05), 24)
    regular = float(np.sum(w_reg * heat_kernel_halfspace(t, x, y_reg, bc) * f(y_reg)))

    levels = tuple(s0 * level_factor**n for n in range(1, refinement_levels + 1))
    partials = []
    for L in levels:
        partials.append(regular + _gl_log_interval(s0, L, singular_integrand))
    ratios = tuple(partials[i + 1] / partials[i] for i in range(len(partials) - 1))
    verdict = "DIVERGES" if all(r >= 2.0 for r in ratios) else "BOUNDED"

    # membership in W^{k,p}(w_{gamma + k p})
    wexp = gamma + k * p
    mem_reg = []
    from .quadrature import integrate_half_line  # noqa: F401  (regular part below)

    for j in range(k + 1):
        fj = np.abs(f(y_reg, j)) ** p * y_reg**wexp
        mem_reg.append(float(np.sum(w_reg * fj)))
    coeffs = [_log_power_derivative_coeffs(theta, -a, j) for j in range(k + 1)]

    def mem_integrand(j):
        E = wexp + 1 + p * (theta - j)  # y-power after dy = y ds

        def g(s):
            poly = sum(c * s ** (-a - m) for m, c in coeffs[j].items())
            return np.exp(-s * E) * np.abs(poly) ** p

        return g

    mem = []
    for L in levels:
        tot = 0.0
        for j in range(k + 1):
            tot += (mem_reg[j] + _gl_log_interval(s0, L, mem_integrand(j))) ** (1.0 / p)
        mem.append(tot)
    inc = np.diff(mem)
    converged = bool(np.all(inc >= -1e-14) and inc[-1] <= 1e-3 * mem[-1] and np.all(inc[1:] <= 0.5 * inc[:-1] + 1e-300))
    return BlowupResult(levels, tuple(partials), ratios, verdict, tuple(mem), converged)


def log_integral_partials(alpha: float, beta: float, levels, y_max: float = 0.5) -> tuple:
    """Partial values of ∫_{e^{-L}}^{y_max} y^alpha |log y|^beta dy for each L."""
    s_min = -math.log(y_max)
    out = []
    for L in levels:
        out.append(_gl_log_interval(s_min, L, lambda s: np.exp(-s * (alpha + 1)) * s**beta))
    return tuple(out)
