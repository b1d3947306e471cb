"""Axial factors: scalar functions of x1 > 0 with analytic derivative closures.

Every factor exposes ``f(x, n)`` for the n-th derivative together with the
geometry that quadrature needs: support, interior breakpoints, the smallest
feature length (``scale``), a radius beyond which values are negligible
(``extent``) and whether graded refinement toward 0 is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DerivativeOrderLost, InsufficientDerivatives, InvalidParameter

INF = math.inf


class Axial:
    """Base class. Subclasses implement ``_eval(x, n)``."""

    k_max: float = INF
    support: tuple[float, float] = (0.0, INF)
    breakpoints: tuple[float, ...] = ()
    scale: float = 1.0
    extent: float = INF
    graded: bool = False
    power_at_zero: float = 0.0
    is_real: bool = True

    def __call__(self, x, n: int = 0) -> np.ndarray:
        n = int(n)
        if n < 0:
            raise InvalidParameter("derivative order must be >= 0")
        if n > self.k_max:
            raise InsufficientDerivatives(f"order {n} exceeds k_max={self.k_max} of {self!r}")
        return self._eval(np.asarray(x, dtype=float), n)

    def _eval(self, x: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError

    # convenience combinators
    def __mul__(self, other):
        if isinstance(other, Axial):
            return Product((self, other))
        return Combination(((complex(other) if np.iscomplexobj(other) else float(other), self),))

    __rmul__ = __mul__

    def __add__(self, other):
        return Combination(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return Combination(((1.0, self), (-1.0, other)))

    def __neg__(self):
        return Combination(((-1.0, self),))


def _decay_extent(rate: float, degree: int, cmax: float, gaussian_s: float | None = None) -> float:
    """Radius beyond which |poly|*decay < 1e-18 * (value scale)."""
    target = 42.0 + math.log1p(cmax)
    x = 1.0
    for _ in range(30):
        grow = degree * math.log1p(x)
        if gaussian_s is None:
            x = (target + grow) / rate
        else:
            x = math.sqrt(4.0 * gaussian_s * (target + grow))
    return x


def _vanishing_order(coeffs) -> int:
    for j, c in enumerate(coeffs):
        if c != 0:
            return j
    return 0


@dataclass(frozen=True)
class ExpPoly(Axial):
    """P(x) e^{-rate x} with P given by ascending coefficients."""

    coeffs: tuple
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidParameter("rate must be positive")

    @cached_property
    def _derivs(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex if self._complex else float))
        out = [c]
        for _ in range(12):
            c = npoly.polyadd(npoly.polyder(c), -self.rate * c)
            out.append(c)
        return out

    @property
    def _complex(self):
        return any(isinstance(c, complex) and c.imag != 0 for c in self.coeffs)

    @property
    def power_at_zero(self):
        return float(_vanishing_order(self.coeffs))

    @property
    def is_real(self):
        return not self._complex

    @property
    def scale(self):
        return 1.0 / (self.rate * (1 + 0.5 * (len(self.coeffs) - 1)))

    @property
    def extent(self):
        return _decay_extent(self.rate, len(self.coeffs) - 1, float(np.max(np.abs(self.coeffs))))

    def _coef(self, n):
        d = self._derivs
        c = d[-1]
        while len(d) <= n:
            c = npoly.polyadd(npoly.polyder(c), -self.rate * c)
            d.append(c)
        return d[n]

    def _eval(self, x, n):
        return npoly.polyval(x, self._coef(n)) * np.exp(-self.rate * x)


@dataclass(frozen=True)
class GaussPoly(Axial):
    """P(x) e^{-x^2/(4 s)} with P given by ascending coefficients, s > 0."""

    coeffs: tuple
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise InvalidParameter("s must be positive")

    @cached_property
    def _derivs(self):
        return [np.atleast_1d(np.asarray(self.coeffs, dtype=float))]

    def _coef(self, n):
        d = self._derivs
        while len(d) <= n:
            c = d[-1]
            d.append(npoly.polyadd(npoly.polyder(c), -npoly.polymulx(c) / (2.0 * self.s)))
        return d[n]

    @property
    def power_at_zero(self):
        return float(_vanishing_order(self.coeffs))

    @property
    def scale(self):
        return math.sqrt(self.s) / math.sqrt(1 + 0.5 * (len(self.coeffs) - 1))

    @property
    def extent(self):
        return _decay_extent(1.0, len(self.coeffs) - 1, float(np.max(np.abs(self.coeffs))), self.s)

    def _eval(self, x, n):
        return npoly.polyval(x, self._coef(n)) * np.exp(-x * x / (4.0 * self.s))


# order-7 smoothstep: S(0)=1, S(1)=0, S', S'', S''' vanish at both ends
_STEP = np.array([1.0, 0, 0, 0, -35.0, 84.0, -70.0, 20.0])
_STEP_DERIVS = [_STEP]
for _ in range(8):
    _STEP_DERIVS.append(npoly.polyder(_STEP_DERIVS[-1]))


@dataclass(frozen=True)
class Step(Axial):
    """Polynomial cutoff: 1 on [0, a], 0 on [b, ∞) (reversed if rising).

    The transition is the order-7 smoothstep, so the factor is C^3 and its
    fourth derivative is bounded with jumps at a and b.
    """

    a: float = 0.5
    b: float = 0.75
    rising: bool = False

    def __post_init__(self):
        if not 0 <= self.a < self.b:
            raise InvalidParameter("need 0 <= a < b")

    k_max = 4

    @property
    def support(self):
        return (self.a, INF) if self.rising else (0.0, self.b)

    @property
    def breakpoints(self):
        return tuple(v for v in (self.a, self.b) if v > 0)

    @property
    def scale(self):
        return (self.b - self.a) / 2.0

    @property
    def extent(self):
        return INF if self.rising else self.b

    def _eval(self, x, n):
        L = self.b - self.a
        u = (x - self.a) / L
        c = _STEP_DERIVS[n]
        mid = npoly.polyval(u, c) / L**n
        left = 1.0 if n == 0 else 0.0
        out = np.where(u <= 0, left, np.where(u >= 1, 0.0, mid))
        if self.rising:
            out = (1.0 if n == 0 else 0.0) - out
        return out.astype(float)


@dataclass(frozen=True)
class Power(Axial):
    """x^theta for x > 0."""

    theta: float

    @property
    def graded(self):
        return not (float(self.theta).is_integer() and self.theta >= 0)

    @property
    def power_at_zero(self):
        return self.theta

    def _eval(self, x, n):
        c = 1.0
        for j in range(n):
            c *= self.theta - j
        if c == 0.0:
            return np.zeros_like(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return c * x ** (self.theta - n)


@dataclass(frozen=True)
class LogPower(Axial):
    """|log x|^beta on (0, 1), set to 0 for x >= 1.

    Intended to be multiplied by a cutoff supported in (0, 1).
    """

    beta: float

    graded = True

    @property
    def support(self):
        return (0.0, 1.0)

    @property
    def extent(self):
        return 1.0

    @property
    def breakpoints(self):
        return ()

    @property
    def scale(self):
        return 0.25

    def _terms(self, n):
        # term (j, m) -> c * x^{-j} * L^{beta - m}, L = -log x
        terms = {(0, 0): 1.0}
        for _ in range(n):
            nxt: dict = {}
            for (j, m), c in terms.items():
                if j:
                    nxt[(j + 1, m)] = nxt.get((j + 1, m), 0.0) - j * c
                if self.beta - m != 0:
                    nxt[(j + 1, m + 1)] = nxt.get((j + 1, m + 1), 0.0) - (self.beta - m) * c
            terms = nxt
        return terms

    def _eval(self, x, n):
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        L = -np.log(xs)
        out = np.zeros_like(xs)
        for (j, m), c in self._terms(n).items():
            out = out + c * xs ** (-j) * L ** (self.beta - m)
        return np.where(inside, out, 0.0)


def _merge_geometry(parts):
    lo = max(p.support[0] for p in parts)
    hi = min(p.support[1] for p in parts)
    return lo, hi


@dataclass(frozen=True)
class Product(Axial):
    """Pointwise product with Leibniz-rule derivatives."""

    factors: tuple

    def __post_init__(self):
        if len(self.factors) < 1:
            raise InvalidParameter("empty product")

    @property
    def k_max(self):
        return min(f.k_max for f in self.factors)

    @property
    def support(self):
        return _merge_geometry(self.factors)

    @property
    def breakpoints(self):
        lo, hi = self.support
        return tuple(sorted({b for f in self.factors for b in f.breakpoints if lo < b < hi}))

    @property
    def scale(self):
        return min(f.scale for f in self.factors)

    @property
    def extent(self):
        return min(min(f.extent for f in self.factors), self.support[1])

    @property
    def graded(self):
        return any(f.graded for f in self.factors)

    @property
    def power_at_zero(self):
        return sum(f.power_at_zero for f in self.factors)

    @property
    def is_real(self):
        return all(f.is_real for f in self.factors)

    def __call__(self, x, n: int = 0):
        if int(n) > self.k_max:
            raise DerivativeOrderLost(f"product rule supplies order <= {self.k_max}, requested {n}")
        return super().__call__(x, n)

    def _eval(self, x, n):
        if len(self.factors) == 1:
            return self.factors[0](x, n)
        head, rest = self.factors[0], Product(self.factors[1:])
        out = 0.0
        for j in range(n + 1):
            out = out + comb(n, j) * head(x, j) * rest(x, n - j)
        return np.asarray(out) * np.ones_like(x)


@dataclass(frozen=True)
class Combination(Axial):
    """Finite linear combination sum c_i a_i."""

    items: tuple

    @property
    def k_max(self):
        return min(a.k_max for _, a in self.items) if self.items else INF

    @property
    def support(self):
        if not self.items:
            return (0.0, 0.0)
        return (min(a.support[0] for _, a in self.items), max(a.support[1] for _, a in self.items))

    @property
    def breakpoints(self):
        return tuple(sorted({b for _, a in self.items for b in a.breakpoints}))

    @property
    def scale(self):
        return min((a.scale for _, a in self.items), default=1.0)

    @property
    def extent(self):
        return max((a.extent for _, a in self.items), default=0.0)

    @property
    def graded(self):
        return any(a.graded for _, a in self.items)

    @property
    def power_at_zero(self):
        return min((a.power_at_zero for _, a in self.items), default=0.0)

    @property
    def is_real(self):
        return all(a.is_real and not np.iscomplexobj(c) for c, a in self.items)

    def _eval(self, x, n):
        out = np.zeros_like(x, dtype=float if self.is_real else complex)
        for c, a in self.items:
            out = out + c * a(x, n)
        return out


@dataclass(frozen=True)
class Dilated(Axial):
    """x -> base(r x)."""

    base: Axial
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidParameter("dilation factor must be positive")

    @property
    def k_max(self):
        return self.base.k_max

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo / self.r, hi / self.r)

    @property
    def breakpoints(self):
        return tuple(b / self.r for b in self.base.breakpoints)

    @property
    def scale(self):
        return self.base.scale / self.r

    @property
    def extent(self):
        return self.base.extent / self.r

    @property
    def graded(self):
        return self.base.graded

    @property
    def power_at_zero(self):
        return self.base.power_at_zero

    @property
    def is_real(self):
        return self.base.is_real

    def _eval(self, x, n):
        return self.r**n * self.base(self.r * x, n)


@dataclass(frozen=True)
class Derived(Axial):
    """m-th derivative of a base factor."""

    base: Axial
    m: int

    @property
    def k_max(self):
        return self.base.k_max - self.m

    @property
    def support(self):
        return self.base.support

    @property
    def breakpoints(self):
        return self.base.breakpoints

    @property
    def scale(self):
        return self.base.scale

    @property
    def extent(self):
        return self.base.extent

    @property
    def graded(self):
        return self.base.graded

    @property
    def power_at_zero(self):
        t = self.base.power_at_zero
        return max(t - self.m, 0.0) if float(t).is_integer() and t >= 0 else t - self.m

    @property
    def is_real(self):
        return self.base.is_real

    def __call__(self, x, n: int = 0):
        if int(n) + self.m > self.base.k_max:
            raise InsufficientDerivatives(f"order {n}+{self.m} exceeds k_max={self.base.k_max}")
        return self.base(x, int(n) + self.m)


@dataclass(frozen=True)
class Antiderivative(Axial):
    """G(x) = ∫_0^x base(y) dy, evaluated by composite Gauss-Legendre panels."""

    base: Axial
    n_nodes: int = 20

    @property
    def k_max(self):
        return self.base.k_max + 1

    @property
    def support(self):
        return (self.base.support[0], INF)

    @property
    def breakpoints(self):
        return self.base.breakpoints

    @property
    def scale(self):
        return self.base.scale

    @property
    def is_real(self):
        return self.base.is_real

    def _eval(self, x, n):
        if n >= 1:
            return self.base(x, n - 1)
        from .quadrature import panel_rule, refine_breaks

        order = np.argsort(x, kind="stable")
        xs = x[order]
        hi_int = min(self.base.support[1], self.base.extent)
        pts = np.concatenate(([0.0], np.clip(xs, 0, hi_int)))
        breaks = np.unique(np.concatenate((pts, [b for b in self.base.breakpoints if b < hi_int])))
        breaks = refine_breaks(breaks, self.base.scale)
        y, w = panel_rule(breaks, self.n_nodes)
        vals = self.base(y, 0) * w
        seg = np.repeat(np.arange(breaks.size - 1), self.n_nodes)
        per_panel = np.bincount(seg, weights=vals.real, minlength=breaks.size - 1)
        if not self.base.is_real:
            per_panel = per_panel + 1j * np.bincount(seg, weights=vals.imag, minlength=breaks.size - 1)
        cum = np.concatenate(([0.0], np.cumsum(per_panel)))
        idx = np.searchsorted(breaks, np.clip(xs, 0, hi_int))
        out = np.empty_like(cum[idx])
        out[order] = cum[idx]
        return out
