"""Fields on the half-space as finite sums of separable terms, plus parameters."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .axial import INF, Axial, Derived, Dilated, Product, Power
from .errors import ExcludedWeight, InvalidParameter, NonIntegrableWeight


def _excluded(gamma: float, p: float, tol: float = 1e-12) -> bool:
    j = (gamma + 1.0) / p
    return j >= 1 - tol and abs(j - round(j)) < tol


@dataclass(frozen=True)
class SpaceParams:
    """Lebesgue exponent p, smoothness k, weight exponent gamma, dimension d.

    In semigroup contexts the space is W^{k,p}(w_{gamma+k p}); see
    ``effective_gamma``. ``weighted_sobolev_norm`` uses ``gamma`` directly.
    """

    p: float = 2.0
    k: int = 0
    gamma: float = 0.0
    d: int = 1

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidParameter("p must exceed 1")
        if int(self.k) != self.k or self.k < -1:
            raise InvalidParameter("k must be an integer >= -1")
        if self.d not in (1, 2, 3):
            raise InvalidParameter("d must be 1, 2 or 3")

    @property
    def effective_gamma(self) -> float:
        return self.gamma + self.k * self.p

    def require_norm(self) -> None:
        if self.effective_gamma <= -1:
            raise NonIntegrableWeight(f"gamma + k p = {self.effective_gamma} <= -1")

    def require_sobolev(self) -> None:
        if _excluded(self.gamma, self.p):
            raise ExcludedWeight(f"gamma={self.gamma} lies in {{jp-1}} for p={self.p}")

    def with_(self, **kw) -> "SpaceParams":
        d = dict(p=self.p, k=self.k, gamma=self.gamma, d=self.d)
        d.update(kw)
        return SpaceParams(**d)


@dataclass(frozen=True)
class PowerWeight:
    """w_gamma(x) = x1^gamma."""

    gamma: float

    def __call__(self, x1):
        return np.asarray(x1, dtype=float) ** self.gamma

    @property
    def locally_integrable(self) -> bool:
        return self.gamma > -1

    def require_integrable(self) -> None:
        if not self.locally_integrable:
            raise NonIntegrableWeight(f"x^{self.gamma} is not integrable on (0,1)")


@dataclass(frozen=True)
class Term:
    coef: complex
    axial: Axial
    tang: object | None = None


def _as_points(xt, dim):
    if dim == 0:
        return None
    xt = np.asarray(xt, dtype=float)
    return xt.reshape(-1, dim)


@dataclass(frozen=True)
class Field:
    """Finite sum Σ c_i a_i(x1) h_i(x̃) on the half-space R^d_+."""

    d: int
    terms: tuple

    # constructors
    @staticmethod
    def axial(a: Axial, coef: complex = 1.0) -> "Field":
        return Field(1, (Term(coef, a, None),))

    @staticmethod
    def separable(a: Axial, tang, coef: complex = 1.0) -> "Field":
        return Field(1 + tang.dim, (Term(coef, a, tang),))

    @staticmethod
    def zero(d: int = 1) -> "Field":
        return Field(d, ())

    # geometry
    @property
    def k_max(self) -> float:
        return min((t.axial.k_max for t in self.terms), default=INF)

    @property
    def extent(self) -> float:
        return max((min(t.axial.extent, t.axial.support[1]) for t in self.terms), default=0.0)

    @property
    def breakpoints(self) -> tuple:
        return tuple(sorted({b for t in self.terms for b in t.axial.breakpoints}))

    @property
    def scale(self) -> float:
        return min((t.axial.scale for t in self.terms), default=1.0)

    @property
    def graded(self) -> bool:
        return any(t.axial.graded for t in self.terms)

    @property
    def power_at_zero(self) -> float:
        return min((t.axial.power_at_zero for t in self.terms), default=0.0)

    @property
    def is_real(self) -> bool:
        return all(
            t.axial.is_real and complex(t.coef).imag == 0 and (t.tang is None or t.tang.is_real)
            for t in self.terms
        )

    @property
    def tangential_extent(self) -> float:
        return max((t.tang.extent for t in self.terms if t.tang is not None), default=0.0)

    @property
    def tangential_scale(self) -> float:
        return min((t.tang.scale for t in self.terms if t.tang is not None), default=1.0)

    # evaluation
    def __call__(self, x1, xt=None, alpha=None) -> np.ndarray:
        """Pointwise evaluation of ∂^alpha f at points (x1[i], xt[i])."""
        x1 = np.asarray(x1, dtype=float)
        alpha = tuple(alpha) if alpha is not None else (0,) * self.d
        shape = x1.shape
        flat = x1.ravel()
        pts = _as_points(xt, self.d - 1)
        if pts is not None and pts.shape[0] == 1 and flat.size > 1:
            pts = np.repeat(pts, flat.size, axis=0)
        out = np.zeros(flat.shape, dtype=float if self.is_real else complex)
        for t in self.terms:
            v = t.coef * t.axial(flat, alpha[0])
            if t.tang is not None:
                v = v * t.tang(pts, alpha[1:])
            out = out + v
        if self.is_real:
            out = np.real(out)
        return out.reshape(shape)

    def grid(self, x1, xt=None, alpha=None) -> np.ndarray:
        """Evaluate on the tensor grid x1 × xt; shape (len(x1), len(xt))."""
        x1 = np.ravel(np.asarray(x1, dtype=float))
        alpha = tuple(alpha) if alpha is not None else (0,) * self.d
        if self.d == 1:
            return self(x1, alpha=alpha)[:, None]
        pts = _as_points(xt, self.d - 1)
        if not self.terms:
            return np.zeros((x1.size, pts.shape[0]))
        A = np.stack([t.coef * t.axial(x1, alpha[0]) for t in self.terms], axis=1)
        B = np.stack([t.tang(pts, alpha[1:]) for t in self.terms], axis=0)
        out = A @ B
        return out.real if self.is_real else out

    # algebra
    def __add__(self, other: "Field") -> "Field":
        if other.d != self.d:
            raise InvalidParameter("dimension mismatch")
        return Field(self.d, self.terms + other.terms)

    def __sub__(self, other: "Field") -> "Field":
        return self + (-1.0) * other

    def __mul__(self, c) -> "Field":
        # zero terms would still set breakpoints, scales and the boundary exponent
        return Field(self.d, tuple(Term(c * t.coef, t.axial, t.tang) for t in self.terms if c * t.coef != 0))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return (-1.0) * self

    def map_terms(self, fn: Callable[[Term], Term | list]) -> "Field":
        out = []
        for t in self.terms:
            r = fn(t)
            out.extend(r if isinstance(r, list) else [r])
        return Field(self.d, tuple(out))

    def derivative(self, alpha) -> "Field":
        alpha = tuple(alpha)
        if len(alpha) != self.d:
            raise InvalidParameter("multi-index length must equal d")

        def fn(t):
            a = Derived(t.axial, alpha[0]) if alpha[0] else t.axial
            if t.tang is None or not any(alpha[1:]):
                return Term(t.coef, a, t.tang)
            c, h = t.tang.derivative(alpha[1:])
            return Term(c * t.coef, a, h)

        return self.map_terms(fn)

    def laplacian(self) -> "Field":
        parts = [self.derivative((2,) + (0,) * (self.d - 1))]
        for j in range(1, self.d):
            e = [0] * self.d
            e[j] = 2
            parts.append(self.derivative(tuple(e)))
        out = parts[0]
        for q in parts[1:]:
            out = out + q
        return out

    def dilate(self, r: float) -> "Field":
        """x ↦ f(r x)."""

        def fn(t):
            a = Dilated(t.axial, r)
            if t.tang is None:
                return Term(t.coef, a, None)
            c, h = t.tang.dilate(r)
            return Term(c * t.coef, a, h)

        return self.map_terms(fn)

    def multiply_axial(self, factor: Axial) -> "Field":
        return self.map_terms(lambda t: Term(t.coef, Product((factor, t.axial)), t.tang))


def multi_indices(d: int, order: int):
    """All multi-indices of length d with |alpha| == order, in lexicographic order."""
    return [a for a in itertools.product(range(order + 1), repeat=d) if sum(a) == order][::-1]


def multiply_power(f: Field, theta: float) -> Field:
    """(M^theta f)(x) = x1^theta f(x)."""
    return f.multiply_axial(Power(float(theta)))
