"""Tangential factors: functions of x̃ ∈ R^{d-1} with closed-form heat evolution.

HermiteGauss is a product of Gaussian derivatives ∂^m G_s; heat flow maps
s to s + z. WaveBundle is a finite sum of plane waves with equal |η|, which
the heat flow multiplies by e^{-z|η|²}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter


def _hermite_phys(m: int, v):
    h0 = np.ones_like(v)
    if m == 0:
        return h0
    h1 = 2 * v
    for j in range(1, m):
        h0, h1 = h1, 2 * v * h1 - 2 * j * h0
    return h1


def gaussian_derivative(m: int, s: complex, x):
    """∂^m G_s(x) in one variable, G_s(x) = (4πs)^{-1/2} e^{-x²/(4s)}."""
    x = np.asarray(x)
    s = complex(s)
    root = np.sqrt(4 * s)
    v = x / root
    g = np.exp(-v * v) / np.sqrt(np.pi * 4 * s)
    out = (-1) ** m * root ** (-m) * _hermite_phys(m, v) * g
    if s.imag == 0:
        out = out.real
    return out


@dataclass(frozen=True)
class HermiteGauss:
    """x̃ ↦ Π_i ∂^{m_i} G_s(x̃_i)."""

    orders: tuple
    s: complex = 1.0

    def __post_init__(self):
        if complex(self.s).real <= 0:
            raise InvalidParameter("HermiteGauss needs Re s > 0")

    @property
    def dim(self) -> int:
        return len(self.orders)

    @property
    def is_real(self) -> bool:
        return complex(self.s).imag == 0

    def __call__(self, xt, alpha=None):
        xt = np.atleast_2d(np.asarray(xt, dtype=float))
        alpha = alpha or (0,) * self.dim
        out = 1.0
        for i, m in enumerate(self.orders):
            out = out * gaussian_derivative(m + alpha[i], self.s, xt[:, i])
        return out

    def evolve(self, z: complex) -> "HermiteGauss":
        return replace(self, s=self.s + z)

    def derivative(self, alpha) -> tuple[complex, "HermiteGauss"]:
        return 1.0, replace(self, orders=tuple(m + a for m, a in zip(self.orders, alpha)))

    def dilate(self, r: float) -> tuple[float, "HermiteGauss"]:
        """(∂^m G_s)(r x) = r^{-m-1} ∂^m G_{s/r²}(x), coordinatewise."""
        c = 1.0
        for m in self.orders:
            c *= r ** (-m - 1)
        return c, replace(self, s=self.s / r**2)

    @property
    def extent(self) -> float:
        s = complex(self.s)
        s_eff = abs(s) / math.cos(math.atan2(s.imag, s.real))
        m = max(self.orders, default=0)
        return math.sqrt(4 * s_eff * (42.0 + m * math.log1p(m + 1))) + 1e-12

    @property
    def scale(self) -> float:
        s = complex(self.s)
        s_eff = abs(s) / math.cos(math.atan2(s.imag, s.real))
        return math.sqrt(s_eff) / (1 + abs(math.tan(math.atan2(s.imag, s.real)))) / math.sqrt(1 + max(self.orders, default=0))

    def waves(self, n_nodes: int = 48) -> list[tuple["WaveBundle"]]:
        """Plane-wave synthesis by Gauss-Hermite quadrature in frequency.

        ∂^m G_s(x) = (2π)^{-1} ∫ (iη)^m e^{-sη²} e^{iηx} dη, s real.
        Returns WaveBundles grouped by |η|².
        """
        s = complex(self.s)
        if s.imag != 0:
            raise InvalidParameter("plane-wave synthesis needs real s")
        s = s.real
        tau, wts = _gauss_hermite(n_nodes)
        eta1 = tau / math.sqrt(s)
        amp1 = wts / (2 * math.pi * math.sqrt(s))
        grids = np.meshgrid(*([eta1] * self.dim), indexing="ij")
        amps = np.meshgrid(*([amp1] * self.dim), indexing="ij")
        etas = np.stack([g.ravel() for g in grids], axis=1)
        amp = np.prod(np.stack([a.ravel() for a in amps], axis=1), axis=1).astype(complex)
        for i, m in enumerate(self.orders):
            amp = amp * (1j * etas[:, i]) ** m
        key = np.round(np.sum(etas**2, axis=1), 12)
        out = []
        for k in np.unique(key):
            sel = key == k
            out.append(WaveBundle(tuple(map(tuple, etas[sel])), tuple(amp[sel])))
        return out


@lru_cache(maxsize=None)
def _gauss_hermite(n):
    return np.polynomial.hermite.hermgauss(n)


@dataclass(frozen=True)
class WaveBundle:
    """x̃ ↦ Σ_j a_j e^{i η_j·x̃} with all |η_j| equal."""

    etas: tuple
    amps: tuple

    @property
    def dim(self) -> int:
        return len(self.etas[0])

    @property
    def eta2(self) -> float:
        return float(np.sum(np.asarray(self.etas[0]) ** 2))

    is_real = False
    extent = math.inf

    @property
    def scale(self) -> float:
        # a 16-node Gauss-Legendre panel spans about 1.5 wavelengths
        return 10.0 / (1.0 + math.sqrt(self.eta2))

    def __call__(self, xt, alpha=None):
        xt = np.atleast_2d(np.asarray(xt, dtype=float))
        E = np.asarray(self.etas, dtype=float)
        a = np.asarray(self.amps, dtype=complex)
        if alpha:
            a = a * np.prod((1j * E) ** np.asarray(alpha), axis=1)
        return np.exp(1j * xt @ E.T) @ a

    def evolve(self, z: complex) -> "WaveBundle":
        f = np.exp(-complex(z) * self.eta2)
        return WaveBundle(self.etas, tuple(np.asarray(self.amps) * f))

    def derivative(self, alpha):
        E = np.asarray(self.etas, dtype=float)
        a = np.asarray(self.amps, dtype=complex) * np.prod((1j * E) ** np.asarray(alpha), axis=1)
        return 1.0, WaveBundle(self.etas, tuple(a))

    def dilate(self, r: float):
        return 1.0, WaveBundle(tuple(map(tuple, np.asarray(self.etas) * r)), self.amps)
