"""Coordinate Bethe-ansatz wave function via contour integrals.

The N-particle amplitude is a sum over permutations of N-fold contour
integrals; each term couples the integration variables only through the
two-particle scattering factors, so per-node one-variable factors are
computed once and shared across all permutations.  Both the small-contour
and large-contour variants are provided and must agree.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, InvalidConfigError, PoleProximityError
from .model import ModelParams, window_padding
from .quadrature import ContourCircle, WorkerPool, discretize_contour, tensor_sum
from .summation import csum

MAX_N_WAVEFUNCTION = 6  # N! M^N cost guard


def dispersion(xi: complex, delta: float) -> complex:
    """Single-particle energy xi + 1/xi - 2*delta."""
    if xi == 0:
        raise InvalidConfigError("dispersion undefined at 0")
    return xi + 1.0 / xi - 2.0 * delta


def s_matrix(xi_b: complex, xi_a: complex, delta: float) -> complex:
    """Two-particle scattering amplitude S_{ba}(xi_b, xi_a)."""
    den = 1.0 + xi_a * xi_b - 2.0 * delta * xi_a
    if abs(den) < 1e-14:
        raise PoleProximityError(f"S-matrix pole at ({xi_b}, {xi_a})")
    return -(1.0 + xi_a * xi_b - 2.0 * delta * xi_b) / den


def inversions(sigma) -> list:
    """Pairs (b, a) with b > a appearing in the order b before a in sigma."""
    pos = {v: i for i, v in enumerate(sigma)}
    return [(b, a) for b in sigma for a in range(1, b) if pos[b] < pos[a]]


def a_coeff(sigma, xi, delta: float) -> complex:
    """Product of scattering factors over the inversions of sigma; A_id = 1."""
    out = 1.0 + 0.0j
    for b, a in inversions(sigma):
        out *= s_matrix(xi[b - 1], xi[a - 1], delta)
    return out


def small_radius(delta: float) -> float:
    """Radius keeping every scattering pole strictly outside the circle."""
    return 0.9 * (math.hypot(delta, 1.0) - abs(delta))


def large_radius(delta: float) -> float:
    """Radius keeping every scattering pole strictly inside the circle."""
    return 1.1 * (abs(delta) + math.hypot(delta, 1.0))


def _contour_radius(delta: float, kind: str) -> float:
    if kind == "small":
        return small_radius(delta)
    if kind == "large":
        return large_radius(delta)
    raise InvalidConfigError(f"contour kind must be 'small' or 'large', not {kind!r}")


def _check_s_poles(nodes: np.ndarray, delta: float):
    den = 1.0 + nodes[:, None] * nodes[None, :] - 2.0 * delta * nodes[:, None]
    if np.abs(den).min() < 1e-10:
        raise PoleProximityError("scattering pole on or near the contour")


def _node_factors(params: ModelParams, nodes: np.ndarray, weights: np.ndarray):
    """Per-variable factors w * xi^{-y_j - 1} e^{-i t eps(xi)} for each j."""
    ex = np.exp(-1j * params.t * (nodes + 1.0 / nodes - 2.0 * params.delta))
    return [weights * nodes ** (-yj - 1) * ex for yj in params.y]


def wavefunction_table(params: ModelParams, sites, contour_kind: str = "small",
                       m: int = 32, pool: WorkerPool | None = None) -> np.ndarray:
    """Amplitudes on every ordered configuration drawn from ``sites``.

    Returns a tensor T with T[p_1, ..., p_N] = psi((sites[p_1], ...)); only
    strictly increasing index tuples are meaningful.  Cost is N! M^N but the
    contraction against the position powers is done once per permutation.
    Cached: a distribution sweep re-uses one table.
    """
    return _wavefunction_table_cached(params, tuple(int(s) for s in sites),
                                      contour_kind, m)


@lru_cache(maxsize=8)
def _wavefunction_table_cached(params: ModelParams, sites, contour_kind: str,
                               m: int) -> np.ndarray:
    n = params.n
    if n > 3:
        raise InvalidConfigError("amplitude tables are limited to N <= 3")
    radius = _contour_radius(params.delta, contour_kind)
    grid = discretize_contour(ContourCircle(radius=radius), m)
    nodes, weights = grid.nodes, grid.weights
    _check_s_poles(nodes, params.delta)
    base = _node_factors(params, nodes, weights)
    xs = np.asarray(sites, dtype=np.int64)
    powers = nodes[:, None] ** xs[None, :]  # [node, position]
    mm = len(nodes)
    out = None
    for sigma in itertools.permutations(range(1, n + 1)):
        w = np.ones((mm,) * n, dtype=np.complex128)
        for j in range(n):
            shape = [1] * n
            shape[j] = mm
            w = w * base[j].reshape(shape)
        for b, a in inversions(sigma):
            xb = nodes.reshape([mm if k == b - 1 else 1 for k in range(n)])
            xa = nodes.reshape([mm if k == a - 1 else 1 for k in range(n)])
            w = w * (-(1.0 + xa * xb - 2.0 * params.delta * xb)
                     / (1.0 + xa * xb - 2.0 * params.delta * xa))
        operands = [w, list(range(n))]
        for i in range(n):
            operands += [powers, [sigma[i] - 1, n + i]]
        term = np.einsum(*operands, list(range(n, 2 * n)), optimize=True)
        out = term if out is None else out + term
    return out


def wavefunction(params: ModelParams, x_config, contour_kind: str = "small",
                 rtol: float = 1e-11, atol: float = 1e-13, m0: int = 32,
                 pool: WorkerPool | None = None):
    """Wave-function amplitude at configuration X; returns (value, error).

    Refines the shared contour grid by doubling until two successive
    estimates agree.
    """
    n = params.n
    if n > MAX_N_WAVEFUNCTION:
        raise InvalidConfigError(f"N = {n} exceeds the N! M^N cost guard")
    if len(x_config) != n:
        raise InvalidConfigError("X and Y must have equal length")
    xs = np.asarray(tuple(x_config), dtype=np.int64)
    radius = _contour_radius(params.delta, contour_kind)

    def estimate(m):
        grid = discretize_contour(ContourCircle(radius=radius), m)
        nodes, weights = grid.nodes, grid.weights
        _check_s_poles(nodes, params.delta)
        base = _node_factors(params, nodes, weights)
        powers = [nodes ** int(x) for x in xs]

        def term_block(*idx):
            vals = None
            for sigma in itertools.permutations(range(1, n + 1)):
                term = np.ones(len(idx[0]), dtype=np.complex128)
                for j in range(n):
                    term = term * base[j][idx[j]]
                for i in range(n):
                    term = term * powers[i][idx[sigma[i] - 1]]
                for b, a in inversions(sigma):
                    xb = nodes[idx[b - 1]]
                    xa = nodes[idx[a - 1]]
                    term = term * (-(1.0 + xa * xb - 2.0 * params.delta * xb)
                                   / (1.0 + xa * xb - 2.0 * params.delta * xa))
                vals = term if vals is None else vals + term
            return vals

        return tensor_sum(term_block, [m] * n, pool)

    m = m0
    prev = estimate(m)
    while 2 * m <= 512:
        m *= 2
        cur = estimate(m)
        err = abs(cur - prev)
        if err <= max(atol, rtol * abs(cur)):
            return cur, err
        prev = cur
    raise ConvergenceError("wavefunction quadrature did not converge", cur, prev)


def table_node_count(params: ModelParams, span: int, contour_kind: str = "small") -> int:
    """Trapezoidal node count that out-runs aliasing for a position table.

    The integrand's Fourier content spans the window width (from the position
    powers) plus the Bessel bandwidth of the exponential factor at the
    contour radius.
    """
    radius = _contour_radius(params.delta, contour_kind)
    band = int(math.ceil(2.0 * params.t * max(radius, 1.0 / radius)))
    return span + 2 * band + 48


def amplitude_table_split(params: ModelParams, sites, m: int | None = None):
    """Amplitude table combining both contour variants by accuracy domain.

    On a circle of radius r the quadrature-error floor of an amplitude scales
    like r^{sum(x) - sum(y)}, so the small circle is accurate to the right of
    the initial positions and the large circle to the left; each entry takes
    the variant whose error floor is smaller.  The two variants agree where
    both are sound, which the tests check directly.
    """
    sites = np.asarray(sites, dtype=np.int64)
    m = m or table_node_count(params, len(sites))
    small = wavefunction_table(params, sites, "small", m=m)
    large = wavefunction_table(params, sites, "large", m=m)
    n = params.n
    total = sites.reshape([-1] + [1] * (n - 1)).copy()
    for j in range(1, n):
        shape = [1] * n
        shape[j] = len(sites)
        total = total + sites.reshape(shape)
    use_small = total >= sum(params.y)
    return np.where(use_small, small, large)


def unitarity_sum(params: ModelParams, m: int | None = None) -> float:
    """sum_X |psi(X)|^2 over the truncation window (should be 1)."""
    pad = window_padding(params.t)
    sites = np.arange(params.y[0] - pad, params.y[-1] + pad + 1)
    table = amplitude_table_split(params, sites, m)
    n = params.n
    if n == 1:
        return float(csum(np.abs(table) ** 2).real)
    idx = np.indices(table.shape)
    mask = np.ones(table.shape, dtype=bool)
    for a, b in zip(range(n - 1), range(1, n)):
        mask &= idx[a] < idx[b]
    return float(csum((np.abs(table) ** 2)[mask]).real)
