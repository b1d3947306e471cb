"""Free and half-line heat kernels for complex time in a sector."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import InvalidParameter, SectorViolation


@dataclass(frozen=True)
class SectorTime:
    """Complex time z with the asserted sector half-angle sigma < π/2."""

    z: complex
    sigma: float = math.pi / 2 - 1e-9

    def __post_init__(self):
        z = complex(self.z)
        if not 0 < self.sigma < math.pi / 2:
            raise InvalidParameter("sigma must lie in (0, π/2)")
        if z.real <= 0:
            raise SectorViolation(f"Re z must be positive, got {z}")
        if abs(cmath.phase(z)) >= self.sigma:
            raise SectorViolation(f"|arg z| = {abs(cmath.phase(z)):.4f} >= sigma = {self.sigma:.4f}")

    @property
    def delta(self) -> float:
        return cmath.phase(complex(self.z))

    @property
    def effective_time(self) -> float:
        """|z|/cos(arg z): the real time whose Gaussian decays at the same rate."""
        return abs(complex(self.z)) / math.cos(self.delta)


def as_time(z) -> SectorTime:
    return z if isinstance(z, SectorTime) else SectorTime(complex(z))


def _value(z: complex, v):
    return v.real if complex(z).imag == 0 else v


def heat_kernel_free(z, x, d: int | None = None):
    """G^d_z(x) = (4πz)^{-d/2} e^{-|x|²/(4z)}; x has shape (..., d) or is scalar for d=1."""
    z = complex(as_time(z).z)
    x = np.asarray(x, dtype=float)
    if d is None:
        d = 1 if x.ndim <= 1 else x.shape[-1]
    r2 = x**2 if (d == 1 and x.ndim <= 1) else np.sum(x**2, axis=-1)
    return _value(z, (4 * np.pi * z) ** (-d / 2) * np.exp(-r2 / (4 * z)))


def _hermite_phys(m: int, v):
    h0 = np.ones_like(v)
    if m == 0:
        return h0
    h1 = 2 * v
    for j in range(1, m):
        h0, h1 = h1, 2 * v * h1 - 2 * j * h0
    return h1


def gaussian_x_derivatives(z: complex, u, nmax: int) -> list:
    """[G_z^{(j)}(u) for j = 0..nmax] in one variable."""
    z = complex(z)
    if z.imag == 0:
        z = z.real  # real times keep the arithmetic real
    root = np.sqrt(4 * z)
    v = u / root
    g = np.exp(-v * v) / np.sqrt(np.pi * 4 * z)
    return [(-1) ** j * root ** (-j) * _hermite_phys(j, v) * g for j in range(nmax + 1)]


def heat_kernel_halfspace(z, x1, y1, bc: str, n: int = 0):
    """∂_{x1}^n H^{1,∓}_z(x1, y1); Dirichlet uses the minus sign.

    Evaluated as G(x-y)·(1 ∓ e^{-xy/z}) so that both terms stay bounded and
    the Dirichlet factor uses expm1 near the boundary.
    """
    z = complex(as_time(z).z)
    x = np.asarray(x1, dtype=float)
    y = np.asarray(y1, dtype=float)
    dirichlet = _is_dirichlet(bc)
    if z.imag == 0:
        z = z.real
    A = gaussian_x_derivatives(z, x - y, n)
    w = -x * y / z
    E = np.exp(w)
    out = 0.0
    for m in range(n + 1):
        if m == 0:
            B = -np.expm1(w) if dirichlet else 1.0 + E
        else:
            B = (-y / z) ** m * E * (-1.0 if dirichlet else 1.0)
        out = out + comb(n, m) * A[n - m] * B
    return _value(z, np.asarray(out))


def _is_dirichlet(bc: str) -> bool:
    b = str(bc).lower()
    if b.startswith("d"):
        return True
    if b.startswith("n"):
        return False
    raise InvalidParameter(f"unknown boundary condition {bc!r}")


def kernel_sector_bound_check(delta: float, t_grid, xy_grid, bc: str = "dirichlet",
                              normalized: bool = False) -> float:
    """sup over the grids of |H_{t e^{iδ}}(x,y)| / H_{t/cos δ}(x,y).

    The sharp bounds are (cos δ)^{-3/2} (Dirichlet) and (cos δ)^{-1/2}
    (Neumann). With ``normalized`` the comparison kernel keeps the prefactor
    (4πt)^{-1/2} instead of (4πt/cos δ)^{-1/2}, i.e. the ratio is multiplied by
    (cos δ)^{1/2}; the bounds become 1/cos δ and 1.
    """
    if not 0 <= delta < math.pi / 2:
        raise InvalidParameter("delta must lie in [0, π/2)")
    xy = np.asarray(xy_grid, dtype=float)
    X, Y = np.meshgrid(xy, xy, indexing="ij")
    best = 0.0
    for t in np.asarray(t_grid, dtype=float):
        num = np.abs(heat_kernel_halfspace(t * cmath.exp(1j * delta), X, Y, bc))
        den = heat_kernel_halfspace(t / math.cos(delta), X, Y, bc)
        ok = den > 1e-290
        if np.any(ok):
            best = max(best, float(np.max(num[ok] / den[ok])))
    return best * math.sqrt(math.cos(delta)) if normalized else best
