"""Commutator identities between resolvents, derivatives and the weight x1."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .fields import Field, SpaceParams, multiply_power
from .norms import weighted_lp_norm
from .spectral import resolve_green


@dataclass(frozen=True)
class CommutatorRow:
    identity: str
    z: complex
    d: int
    residual: float
    norm_u: float

    @property
    def relative(self) -> float:
        return self.residual / self.norm_u if self.norm_u > 0 else self.residual


def _dx1(f: Field, n: int = 1) -> Field:
    return f.derivative((n,) + (0,) * (f.d - 1))


def commutator_suite(z: complex, u: Field, sp: SpaceParams | None = None, ells=(0, 1),
                     window: float | None = None) -> list:
    """Residuals of the resolvent commutator identities for R = (z - Δ)^{-1}.

    Dirichlet rows need u compactly supported in x1 > 0; the Neumann row
    needs ∂1 u compactly supported. Norms are L^p(w_gamma) with (p, gamma)
    from ``sp``.
    """
    sp = sp or SpaceParams(2.0, 0, 0.0, u.d)
    if u.d > 2:
        raise InvalidParameter("the suite covers d <= 2")
    p, g = sp.p, sp.effective_gamma
    if window is None and u.d > 1:
        window = u.tangential_extent

    def norm(f):
        return weighted_lp_norm(f, p, g, None, None, window)

    def RD(f):
        return resolve_green("dirichlet", z, f)

    def RN(f):
        return resolve_green("neumann", z, f)

    nu = norm(u)
    rows = []
    Ru = RD(u)
    if u.d > 1:
        a = (0, 1)
        r = u.derivative(a)
        rows.append(CommutatorRow("[d_2, R_Dir]u", z, u.d, norm(Ru.derivative(a) - RD(r)), nu))
    rows.append(CommutatorRow("[d_1^2, R_Dir]u", z, u.d, norm(_dx1(Ru, 2) - RD(_dx1(u, 2))), nu))
    for ell in ells:
        lhs = multiply_power(_dx1(Ru, ell) if ell else Ru, 1.0) - RD(multiply_power(_dx1(u, ell) if ell else u, 1.0))
        rhs = -2.0 * RD(_dx1(Ru, ell + 1))
        rows.append(CommutatorRow(f"[M d_1^{ell}, R_Dir]u + 2 R d_1^{ell + 1} R u", z, u.d, norm(lhs - rhs), nu))
    rows.append(CommutatorRow("d_1 R_Neu u - R_Dir d_1 u", z, u.d, norm(_dx1(RN(u)) - RD(_dx1(u))), nu))
    return rows
