"""Half-line ground truth in d=1: method-of-images Green functions and
sine/cosine-transform multipliers."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .axial import INF, Axial
from .errors import AliasWarning, BranchCut, InvalidParameter, UnboundedSymbol
from .fields import Field, Term
from .kernels import _is_dirichlet
from .quadrature import gauss_legendre, panel_rule, refine_breaks

_LCUT = 40.0  # e^{-40} relative cut for exponential kernels


def _principal_root(mu: complex) -> complex:
    mu = complex(mu)
    if mu.imag == 0 and mu.real <= 0:
        raise BranchCut(f"spectral parameter {mu} lies on (-inf, 0]")
    return cmath.sqrt(mu)


def _graded_offsets(kabs: float, lcut: float, hcap: float, maxlen: float) -> np.ndarray:
    """Distances 0 < d_1 < ... from a segment end: geometric then uniform."""
    h = 0.25 / kabs
    d = [0.0]
    while d[-1] < min(lcut, maxlen):
        d.append(d[-1] + min(h, hcap))
        h *= 2
    return np.asarray(d)


def _segment_sums(left, right, toward_right: bool, k: complex, base: Axial, n: int,
                  hcap: float, lcut: float):
    """For each segment [l, r]: ∫ e^{-k (r-y)} a(y) dy (toward_right) or ∫ e^{-k (y-l)} a(y) dy."""
    S = left.size
    out = np.zeros(S, dtype=complex)
    length = right - left
    act = length > 0
    if not np.any(act):
        return out
    L, R, Ln = left[act], right[act], length[act]
    D = _graded_offsets(abs(k), lcut, hcap, float(Ln.max()))
    Dc = np.minimum(D[None, :], np.minimum(Ln, lcut)[:, None])
    if toward_right:
        br = R[:, None] - Dc
    else:
        br = L[:, None] + Dc
    a, b = br[:, :-1], br[:, 1:]
    x, w = gauss_legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    keep = np.abs(half) > 0
    seg_id = np.broadcast_to(np.arange(L.size)[:, None], a.shape)[keep]
    mid, half = mid[keep], half[keep]
    y = mid[:, None] + half[:, None] * x[None, :]
    wy = np.abs(half)[:, None] * w[None, :]
    ends = (R[seg_id] if toward_right else L[seg_id])[:, None]
    dist = (ends - y) if toward_right else (y - ends)
    vals = base(y.ravel(), 0).reshape(y.shape)
    contrib = np.sum(wy * np.exp(-k * dist) * vals, axis=1)
    sums = np.bincount(seg_id, weights=contrib.real, minlength=L.size) + 1j * np.bincount(
        seg_id, weights=contrib.imag, minlength=L.size)
    out[act] = sums
    return out


def _exp_scan(x, inc, k: complex, forward: bool, span: float = 50.0):
    """out_i = Σ_{j<=i} inc_j e^{-k(x_i-x_j)} (forward) or Σ_{j>=i} inc_j e^{-k(x_j-x_i)}.

    Cumulative sums run in blocks on which Re k·(x - x_ref) stays below span.
    """
    if not forward:
        return _exp_scan(-x[::-1], inc[::-1], k, True, span)[::-1]
    out = np.empty(x.size, dtype=complex)
    group = np.floor((x - x[0]) * k.real / span).astype(np.int64)
    cut = np.flatnonzero(np.diff(group)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [x.size]))
    carry = 0.0 + 0.0j
    prev = x[0]
    for s, e in zip(starts, ends):
        ref = x[s]
        carry = carry * np.exp(-k * (ref - prev))
        xs = x[s:e] - ref
        cs = np.cumsum(inc[s:e] * np.exp(k * xs))
        out[s:e] = (cs + carry) * np.exp(-k * xs)
        carry, prev = out[e - 1], x[e - 1]
    return out


@dataclass(frozen=True, eq=False)
class GreenResolved(Axial):
    """u = (mu - d²/dx²)^{-1} base on the half-line with Dirichlet or Neumann condition.

    Kernel (1/2k)(e^{-k|x-y|} ∓ e^{-k(x+y)}), k = sqrt(mu). Values at sorted
    points come from a stable forward/backward recursion of the one-sided
    exponential integrals.
    """

    base: Axial
    mu: complex
    bc: str
    n_nodes: int = 16

    def __post_init__(self):
        _principal_root(self.mu)
        _is_dirichlet(self.bc)

    @property
    def k(self) -> complex:
        return _principal_root(self.mu)

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
    def is_real(self):
        return self.base.is_real and complex(self.mu).imag == 0

    @property
    def scale(self):
        return min(self.base.scale, 1.0 / abs(self.k))

    @property
    def extent(self):
        hi = min(self.base.extent, self.base.support[1])
        return hi + _LCUT / self.k.real if np.isfinite(hi) else INF

    def _eval(self, x, n):
        return GreenPlan(self.base, x).solve(self.mu, self.bc, n, self.n_nodes, self.is_real)


_SHORT_NODES = 10


class GreenPlan:
    """Evaluation plan for (mu - d²/dx²)^{-1} base at fixed points, reusable across mu.

    Segments between consecutive sorted points that are short compared with
    1/|k| use fixed Gauss nodes whose base values are cached; longer ones are
    integrated with nodes graded toward the exponential's peak.
    """

    def __init__(self, base: Axial, x):
        self.base = base
        self.shape = np.shape(x)
        flat = np.asarray(x, dtype=float).ravel()
        self.flat = flat
        lo_b, hi_b = base.support
        hi_b = min(hi_b, base.extent)
        self.lo_b, self.hi_b = lo_b, hi_b
        self.step = base.scale
        aux = np.arange(0.0, hi_b, self.step) if np.isfinite(hi_b) else np.empty(0)
        pts = np.unique(np.concatenate((flat, [0.0], aux, [b for b in base.breakpoints if b < hi_b],
                                        [hi_b] if np.isfinite(hi_b) else [])))
        self.pts = pts[pts >= 0]
        pts = self.pts
        self.left = np.concatenate(([0.0], pts[:-1]))
        self.right = np.concatenate((pts[1:], [max(hi_b, pts[-1])]))
        # clipped segments: A runs over [left, pts], B over [pts, right]
        self.segA = (np.clip(self.left, lo_b, hi_b), np.clip(pts, lo_b, hi_b))
        self.segB = (np.clip(pts, lo_b, hi_b), np.clip(self.right, lo_b, hi_b))
        self.idx = np.searchsorted(pts, flat)
        gx, gw = gauss_legendre(_SHORT_NODES)
        self._cache = {}
        for key, (l, r) in (("A", self.segA), ("B", self.segB)):
            ln = r - l
            ok = np.nonzero((ln > 0) & (ln <= 0.5 * self.step))[0]
            y = 0.5 * (l[ok] + r[ok])[:, None] + 0.5 * ln[ok][:, None] * gx[None, :]
            wy = 0.5 * ln[ok][:, None] * gw[None, :]
            vals = base(y.ravel(), 0).reshape(y.shape) if ok.size else np.zeros(y.shape)
            self._cache[key] = (ok, ln[ok], y, wy * vals)
        self._derivs = {}

    def _base_deriv(self, j):
        if j not in self._derivs:
            self._derivs[j] = self.base(self.flat, j)
        return self._derivs[j]

    def _sums(self, key, k, n_nodes):
        l, r = self.segA if key == "A" else self.segB
        toward_right = key == "A"
        out = np.zeros(l.size, dtype=complex)
        ok, ln, y, wv = self._cache[key]
        short = ln * abs(k) <= 0.5
        if np.any(short):
            sel = ok[short]
            ends = (r[sel] if toward_right else l[sel])[:, None]
            dist = (ends - y[short]) if toward_right else (y[short] - ends)
            out[sel] = np.sum(wv[short] * np.exp(-k * dist), axis=1)
        rest = np.ones(l.size, dtype=bool)
        rest[ok[short]] = False
        rest &= (r - l) > 0
        if np.any(rest):
            hcap = min(4.0 / abs(k), self.step)
            out[rest] = _segment_sums(l[rest], r[rest], toward_right, k, self.base, n_nodes, hcap,
                                      _LCUT / k.real)
        return out

    def solve(self, mu, bc, n=0, n_nodes=16, real=False):
        k = _principal_root(mu)
        pts = self.pts
        segA = self._sums("A", k, n_nodes)
        r_eff = self.segA[1]
        inc = np.zeros(pts.size, dtype=complex)
        nz = segA != 0
        inc[nz] = segA[nz] * np.exp(-k * (pts[nz] - r_eff[nz]))
        IA = _exp_scan(pts, inc, k, forward=True)
        segB = self._sums("B", k, n_nodes)
        l_eff = self.segB[0]
        inc = np.zeros(pts.size, dtype=complex)
        nz = segB != 0
        inc[nz] = segB[nz] * np.exp(-k * (l_eff[nz] - pts[nz]))
        IB = _exp_scan(pts, inc, k, forward=False)
        C = IB[0]
        flat = self.flat
        ia, ib = IA[self.idx], IB[self.idx]
        sgn = -1.0 if _is_dirichlet(bc) else 1.0
        out = (-k) ** n * ia + k**n * ib + sgn * (-k) ** n * np.exp(-k * flat) * C
        for m in range(n):
            c = (-k) ** m - k**m
            if c != 0:
                out = out + c * self._base_deriv(n - 1 - m)
        out = (out / (2 * k)).reshape(self.shape)
        return out.real if real else out


def resolve_green(bc: str, mu: complex, f: Field, n_nodes: int = 16) -> Field:
    """(mu - Δ)^{-1} f by the Green kernel; d >= 2 requires plane-wave tangential factors
    or is handled via ``tangential_waves``."""
    terms = []
    for t in f.terms:
        if t.tang is None:
            terms.append(Term(t.coef, GreenResolved(t.axial, complex(mu), bc, n_nodes), None))
        elif hasattr(t.tang, "eta2"):
            terms.append(Term(t.coef, GreenResolved(t.axial, complex(mu) + t.tang.eta2, bc, n_nodes), t.tang))
        else:
            for wb in t.tang.waves():
                terms.append(Term(t.coef, GreenResolved(t.axial, complex(mu) + wb.eta2, bc, n_nodes), wb))
    return Field(f.d, tuple(terms))


def oracle_resolvent(bc: str, lam: complex, f: Field, n_nodes: int = 16) -> Field:
    """u solving lam u - u'' = f on the half-line with the boundary condition of bc."""
    if f.d != 1:
        raise InvalidParameter("the oracle is one-dimensional")
    _principal_root(lam)
    return resolve_green(bc, lam, f, n_nodes)


# ------------------------------------------------------------------ transforms


def _mode(mode: str) -> str:
    m = mode.lower()
    if m.startswith("s"):
        return "sine"
    if m.startswith("c"):
        return "cosine"
    raise InvalidParameter(f"unknown transform mode {mode!r}")


def _trig(mode, theta, n=0):
    shift = n * math.pi / 2
    return np.sin(theta + shift) if mode == "sine" else np.cos(theta + shift)


def _x_rule(f: Field, xi_max: float, n: int = 24):
    hi = f.extent
    if not np.isfinite(hi):
        raise InvalidParameter("transform needs a field with finite extent")
    h = min(f.scale, 8.0 / max(xi_max, 1e-12))
    br = refine_breaks([0.0, hi] + [b for b in f.breakpoints if 0 < b < hi], h)
    return panel_rule(br, n)


def oracle_transform(f: Field, mode: str, xi, chunk: int | None = None) -> np.ndarray:
    """F_s f(ξ) = ∫_0^∞ f sin(ξx) dx or F_c f(ξ) = ∫_0^∞ f cos(ξx) dx."""
    mode = _mode(mode)
    if f.d != 1:
        raise InvalidParameter("the oracle is one-dimensional")
    xi = np.asarray(xi, dtype=float)
    if not f.terms:
        return np.zeros_like(xi)
    flat = xi.ravel()
    x, w = _x_rule(f, float(np.max(np.abs(flat))) if flat.size else 1.0)
    fx = f(x) * w
    chunk = chunk or max(1, (1 << 21) // x.size)  # bounds the trig block to ~16 MB
    out = np.empty(flat.size, dtype=complex if np.iscomplexobj(fx) else float)
    for s in range(0, flat.size, chunk):
        out[s:s + chunk] = _trig(mode, np.outer(flat[s:s + chunk], x)) @ fx
    return out.reshape(xi.shape)


@dataclass(frozen=True)
class TransformGrid:
    """Frequency nodes/weights on (0, Ξ) for inverse transforms, plus the forward values."""

    xi_nodes: np.ndarray
    xi_weights: np.ndarray
    values: np.ndarray
    mode: str
    xi_max: float
    tail_fraction: float

    def inverse(self, x, n: int = 0, multiplier=None) -> np.ndarray:
        """(2/π) ∫_0^Ξ m(ξ) F(ξ) ∂_x^n trig(ξx) dξ."""
        x = np.asarray(x, dtype=float)
        m = 1.0 if multiplier is None else multiplier
        g = self.xi_weights * m * self.values * self.xi_nodes**n
        flat = x.ravel()
        out = np.empty(flat.size, dtype=complex)
        for s in range(0, flat.size, 256):
            out[s:s + 256] = _trig(self.mode, np.outer(flat[s:s + 256], self.xi_nodes), n) @ g
        out = out * (2.0 / math.pi)
        if not np.iscomplexobj(m) and not np.iscomplexobj(self.values):
            out = out.real
        return out.reshape(x.shape)


def transform_grid(f: Field, mode: str, x_max: float = 20.0, tol: float = 1e-13,
                   weight: Callable[[np.ndarray], np.ndarray] | None = None,
                   xi_cap: float = 4096.0, n: int = 24) -> TransformGrid:
    """Choose Ξ so that |weight·F| beyond Ξ is below tol relative, then build the grid.

    ``weight`` is the multiplier that will be applied (defaults to 1).
    """
    mode = _mode(mode)
    weight = weight or (lambda s: np.ones_like(s))
    ext = f.extent
    h = min(1.0 / max(ext, 1.0), 4.0 / max(x_max, 1.0))
    xi_max = max(8.0 / f.scale, 16.0)
    while True:
        probe = np.linspace(0.0, xi_max, 513)[1:]
        vals = np.abs(weight(probe) * oracle_transform(f, mode, probe))
        peak = max(float(vals.max()), 1e-300)
        tail = float(vals[probe > 0.75 * xi_max].max()) / peak
        if tail < tol or xi_max >= xi_cap:
            break
        xi_max *= 2
    if tail >= tol:
        warnings.warn(f"relative transform tail {tail:.2e} at Ξ={xi_max:g}", AliasWarning, stacklevel=2)
    br = refine_breaks([0.0, xi_max], h)
    xi, wx = panel_rule(br, n)
    return TransformGrid(xi, wx, oracle_transform(f, mode, xi), mode, xi_max, tail)


@dataclass(frozen=True, eq=False)
class SpectralMultiplied(Axial):
    """Lazy axial factor: inverse transform of m(ξ)·F f(ξ)."""

    grid: TransformGrid
    multiplier: np.ndarray
    spread: float
    real: bool = True

    @property
    def is_real(self):
        return self.real

    @property
    def extent(self):
        return self.spread

    @property
    def scale(self):
        return min(1.0, math.pi / self.grid.xi_max * 8)

    def _eval(self, x, n):
        out = self.grid.inverse(x, n, self.multiplier)
        return out.real if self.real else out


def oracle_function_calculus(bc: str, phi: Callable, lambda_shift: float, f: Field,
                             x_max: float = 20.0, cap: float = 1e8, tol: float = 1e-13,
                             decay: Callable | None = None) -> Field:
    """φ(λ_shift - Δ) f as the multiplier φ(λ_shift + ξ²) on the sine (Dirichlet)
    or cosine (Neumann) transform.

    Returns a lazy field valid on [0, x_max]. ``decay`` optionally bounds |φ|
    along the frequency axis for choosing Ξ (defaults to |φ| itself).
    """
    if f.d != 1:
        raise InvalidParameter("the oracle is one-dimensional")
    if lambda_shift < 0:
        raise InvalidParameter("lambda_shift must be >= 0")
    mode = "sine" if _is_dirichlet(bc) else "cosine"
    if not f.terms:
        return Field.zero(1)
    symb = lambda xi: np.asarray(phi(lambda_shift + xi**2))  # noqa: E731
    with np.errstate(over="ignore", invalid="ignore"):
        screen = np.abs(symb(np.concatenate(([0.0], np.geomspace(1e-3, 4096.0, 256)))))
    if not np.all(np.isfinite(screen)) or float(np.max(screen)) > cap:
        raise UnboundedSymbol(f"|φ| exceeds cap {cap:.1e} on the frequency axis")
    weight = decay or (lambda xi: np.abs(symb(xi)))
    grid = transform_grid(f, mode, x_max, tol, weight)
    m = symb(grid.xi_nodes)
    if float(np.max(np.abs(m))) > cap:
        raise UnboundedSymbol(f"|φ| reaches {float(np.max(np.abs(m))):.3e} > cap {cap:.1e}")
    real = f.is_real and not np.iscomplexobj(m)
    return Field.axial(SpectralMultiplied(grid, m, x_max, real))
