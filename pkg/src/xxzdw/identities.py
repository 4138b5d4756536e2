"""Weight determinant and the permutation-sum identities built on it.

The central objects: the pair weight d(x, y) = 1/((1-xy)(x+y-2*Delta*xy)),
its N x N determinant (the Izergin-Korepin determinant in disguise), the
Cantini-Colomo-Pronko double-sum identity that collapses the (N!)^2
permutation sum into that determinant, the polynomial Q_N extracted from it,
and the equivalent U-factor form of the same identity.  Everything here is
pointwise algebra; the tests drive it at seeded random points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, PoleProximityError
from .bethe import a_coeff
from .quadrature import det_complex

MAX_N_DOUBLE_SUM = 4  # (N!)^2 terms


@dataclass
class IdentityCheckReport:
    n: int
    delta: float
    xi: tuple
    zeta: tuple
    lhs: complex
    rhs: complex

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)


def d_weight(xi: complex, zeta: complex, delta: float) -> complex:
    """Pair weight 1 / ((1 - xi zeta)(xi + zeta - 2 delta xi zeta))."""
    f1 = 1.0 - xi * zeta
    f2 = xi + zeta - 2.0 * delta * xi * zeta
    if abs(f1) < 1e-14 or abs(f2) < 1e-14:
        raise PoleProximityError(f"d-weight pole at ({xi}, {zeta})")
    return 1.0 / (f1 * f2)


def ik_determinant(xi, zeta, delta: float) -> complex:
    """det of the pair-weight matrix d(xi_i, zeta_j)."""
    if len(xi) != len(zeta):
        raise InvalidConfigError("need equally many xi and zeta points")
    m = [[d_weight(a, b, delta) for b in zeta] for a in xi]
    return det_complex(m)


def _geometric_factor(sigma, mu, xi, zeta):
    """xi_{s(2)} z_{m(2)} xi_{s(3)}^2 z_{m(3)}^2 ... over the telescoping
    (1 - tail product) denominators."""
    n = len(sigma)
    num = 1.0 + 0.0j
    for i in range(2, n + 1):
        num *= (xi[sigma[i - 1] - 1] * zeta[mu[i - 1] - 1]) ** (i - 1)
    den = 1.0 + 0.0j
    for i in range(2, n + 1):
        tail = 1.0 + 0.0j
        for j in range(i, n + 1):
            tail *= xi[sigma[j - 1] - 1] * zeta[mu[j - 1] - 1]
        if abs(1.0 - tail) < 1e-6:
            raise PoleProximityError("tail product within 1e-6 of 1")
        den *= 1.0 - tail
    return num / den


def ccp_check(n: int, delta: float, xi, zeta) -> IdentityCheckReport:
    """Both sides of the double permutation-sum identity at one point set."""
    if n > MAX_N_DOUBLE_SUM:
        raise InvalidConfigError(f"double sum capped at N = {MAX_N_DOUBLE_SUM}")
    xi = tuple(xi)
    zeta = tuple(zeta)
    lhs = 0.0 + 0.0j
    for sigma in itertools.permutations(range(1, n + 1)):
        for mu in itertools.permutations(range(1, n + 1)):
            lhs += (a_coeff(sigma, xi, delta) * a_coeff(mu, zeta, delta)
                    * _geometric_factor(sigma, mu, xi, zeta))
    pref = 1.0 - np.prod([xi[j] * zeta[j] for j in range(n)])
    num = 1.0 + 0.0j
    for i in range(n):
        for j in range(n):
            num *= xi[i] + zeta[j] - 2.0 * delta * xi[i] * zeta[j]
    den = 1.0 + 0.0j
    for i in range(n):
        for j in range(i + 1, n):
            den *= (1.0 + xi[i] * xi[j] - 2.0 * delta * xi[i])
            den *= (1.0 + zeta[i] * zeta[j] - 2.0 * delta * zeta[i])
    if abs(den) < 1e-14:
        raise PoleProximityError("scattering-pole denominator vanished")
    rhs = pref * num / den * ik_determinant(xi, zeta, delta)
    return IdentityCheckReport(n, delta, xi, zeta, lhs, rhs)


def q_poly_value(xi, zeta, delta: float) -> complex:
    """The symmetric polynomial Q_N extracted from the weight determinant.

    Q_N = prod(xi_j + zeta_k - 2 delta xi_j zeta_k) * D_N * prod(1 - xi_j zeta_k)
          / (vandermonde(xi) * vandermonde(zeta)); degree N-1 in each variable.
    """
    n = len(xi)
    if len(zeta) != n:
        raise InvalidConfigError("need equally many xi and zeta points")
    vdm = 1.0 + 0.0j
    for pts in (xi, zeta):
        for i in range(n):
            for j in range(i + 1, n):
                if abs(pts[j] - pts[i]) < 1e-12:
                    raise InvalidConfigError("coincident points make the extraction singular")
                vdm *= pts[j] - pts[i]
    num = ik_determinant(xi, zeta, delta)
    for a in xi:
        for b in zeta:
            num *= (a + b - 2.0 * delta * a * b) * (1.0 - a * b)
    return num / vdm


def u_factor(xi: complex, xi2: complex, delta: float) -> complex:
    """U(xi, xi') = (1 + xi xi' - 2 delta xi) / (xi' - xi)."""
    if abs(xi2 - xi) < 1e-14:
        raise PoleProximityError("coincident U-factor arguments")
    return (1.0 + xi * xi2 - 2.0 * delta * xi) / (xi2 - xi)


def u_form_check(n: int, delta: float, xi, zeta) -> IdentityCheckReport:
    """U-factor form of the double-sum identity.

    LHS: sum over (sigma, mu) of prod_{i<j} U(xi_{s(i)}, xi_{s(j)})
    U(zeta_{m(i)}, zeta_{m(j)}) times the geometric factor.  RHS:
    (1 - prod xi_j zeta_j) / prod_{j,k}(1 - xi_j zeta_k) * Q_N.
    """
    if n > MAX_N_DOUBLE_SUM:
        raise InvalidConfigError(f"double sum capped at N = {MAX_N_DOUBLE_SUM}")
    xi = tuple(xi)
    zeta = tuple(zeta)
    lhs = 0.0 + 0.0j
    for sigma in itertools.permutations(range(1, n + 1)):
        for mu in itertools.permutations(range(1, n + 1)):
            term = _geometric_factor(sigma, mu, xi, zeta)
            for i in range(n):
                for j in range(i + 1, n):
                    term *= u_factor(xi[sigma[i] - 1], xi[sigma[j] - 1], delta)
                    term *= u_factor(zeta[mu[i] - 1], zeta[mu[j] - 1], delta)
            lhs += term
    pref = 1.0 - np.prod([xi[j] * zeta[j] for j in range(n)])
    den = 1.0 + 0.0j
    for a in xi:
        for b in zeta:
            den *= 1.0 - a * b
    rhs = pref / den * q_poly_value(xi, zeta, delta)
    return IdentityCheckReport(n, delta, xi, zeta, lhs, rhs)


def q2_explicit(xi, zeta, delta: float) -> complex:
    """Closed 9-term form of Q_2, kept as an independent cross-check."""
    x1, x2 = xi
    z1, z2 = zeta
    d = delta
    return (4 * d * d * z1 * z2 * x1 * x2
            - 2 * d * z1 * z2 * x1 - 2 * d * z1 * z2 * x2
            - 2 * d * z1 * x1 * x2 - 2 * d * z2 * x1 * x2
            + z1 * z2 * x1 * x2 + z1 * z2 + x1 * x2 + 1.0)
