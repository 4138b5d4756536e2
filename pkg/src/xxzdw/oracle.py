"""Exact reference dynamics on a finite lattice window.

Builds the N-particle sector of the spin-chain Hamiltonian (hopping 1 between
neighbouring sites, diagonal -Delta per particle/hole boundary), propagates
with a Chebyshev expansion of exp(-itH), and extracts particle-position
marginals.  Every contour-integral route in the package is tested against
this module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, InvalidConfigError
from .model import ModelParams, window_padding
from .special import bessel_j_array


@dataclass(frozen=True)
class LatticeWindow:
    left: int
    right: int  # inclusive

    def __post_init__(self):
        if self.left >= self.right:
            raise InvalidConfigError("window needs left < right")

    @property
    def size(self) -> int:
        return self.right - self.left + 1

    @classmethod
    def around(cls, y, t: float) -> "LatticeWindow":
        pad = window_padding(t)
        return cls(min(y) - pad, max(y) + pad)


class SectorBasis:
    """Lexicographically ordered N-particle configurations on a window."""

    def __init__(self, window: LatticeWindow, n: int):
        if window.size < n:
            raise InvalidConfigError("window too small for the particle number")
        self.window = window
        self.n = n
        sites = range(window.left, window.right + 1)
        self.states = np.array(list(itertools.combinations(sites, n)), dtype=np.int64)
        self.index = {tuple(s): i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def unit_vector(self, config) -> np.ndarray:
        v = np.zeros(len(self), dtype=np.complex128)
        v[self.index[tuple(config)]] = 1.0
        return v


def build_hamiltonian(window: LatticeWindow, n: int, delta: float, basis: SectorBasis | None = None):
    """Sparse sector Hamiltonian: hops 1, diagonal -delta per occupied/empty
    neighbour pair (j, j+1) inside the window."""
    basis = basis or SectorBasis(window, n)
    rows, cols, vals = [], [], []
    lo, hi = window.left, window.right
    for s, state in enumerate(basis.states):
        occ = set(int(x) for x in state)
        boundary = 0
        for x in occ:
            if x + 1 <= hi and x + 1 not in occ:
                boundary += 1
            if x - 1 >= lo and x - 1 not in occ:
                boundary += 1
        if boundary:
            rows.append(s)
            cols.append(s)
            vals.append(-delta * boundary)
        for i, x in enumerate(state):
            for dx in (-1, 1):
                tgt = int(x) + dx
                if tgt < lo or tgt > hi or tgt in occ:
                    continue
                new = list(state)
                new[i] = tgt
                new.sort()
                rows.append(basis.index[tuple(new)])
                cols.append(s)
                vals.append(1.0)
    h = sp.csr_matrix((vals, (rows, cols)), shape=(len(basis),) * 2)
    return h, basis


def _spectral_bounds(h: sp.csr_matrix):
    d = h.diagonal()
    offrow = np.abs(h).sum(axis=1).A1 - np.abs(d)
    lo = float((d - offrow).min())
    hi = float((d + offrow).max())
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ConvergenceError("spectral bound estimation failed")
    return lo, hi


def evolve(h: sp.csr_matrix, psi0: np.ndarray, t: float, coeff_floor: float = 1e-16) -> np.ndarray:
    """psi(t) = exp(-i t H) psi0 by Chebyshev expansion.

    Coefficients are (2 - delta_{k0}) (-i)^k J_k(a t) for H scaled to [-1, 1];
    the series is truncated once the coefficients drop below `coeff_floor`.
    """
    if t == 0.0:
        return psi0.copy()
    lo, hi = _spectral_bounds(h)
    a = 0.5 * (hi - lo) + 1e-9
    b = 0.5 * (hi + lo)
    at = a * t
    kmax = int(math.ceil(at)) + 60 + int(3.0 * math.sqrt(at + 1.0))
    jk = bessel_j_array(kmax, at)
    keep = kmax
    while keep > 2 and abs(jk[keep]) < coeff_floor and abs(jk[keep - 1]) < coeff_floor:
        keep -= 1
    phase = np.exp(-1j * b * t)
    hs = (h - sp.identity(h.shape[0], format="csr") * b) * (1.0 / a)
    pk_prev = psi0.astype(np.complex128)
    pk = hs @ pk_prev
    out = jk[0] * pk_prev + 2.0 * (-1j) * jk[1] * pk
    for k in range(2, keep + 1):
        pk_next = 2.0 * (hs @ pk) - pk_prev
        pk_prev, pk = pk, pk_next
        out += 2.0 * ((-1j) ** k) * jk[k] * pk
    psi = phase * out
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-10 * max(1.0, np.linalg.norm(psi0)):
        raise ConvergenceError(f"propagator lost unitarity: |psi| = {nrm}")
    return psi


def marginal_mth_particle(psi: np.ndarray, basis: SectorBasis, m: int, x: int | None = None):
    """P(m-th particle from the left is at x); all x at once when x is None."""
    if not (1 <= m <= basis.n):
        raise InvalidConfigError(f"m must be in [1, {basis.n}]")
    pos = basis.states[:, m - 1]
    prob = np.abs(psi) ** 2
    if x is not None:
        return float(prob[pos == x].sum())
    xs = np.arange(basis.window.left, basis.window.right + 1)
    out = np.zeros(len(xs))
    np.add.at(out, pos - basis.window.left, prob)
    return xs, out


@lru_cache(maxsize=6)
def _domain_wall_state_cached(params: ModelParams, window: LatticeWindow):
    h, basis = build_hamiltonian(window, params.n, params.delta)
    psi0 = basis.unit_vector(params.y)
    return evolve(h, psi0, params.t), basis


def domain_wall_state(params: ModelParams, window: LatticeWindow | None = None):
    """Propagated state for the given parameters; returns (psi, basis).

    Cached on (params, window): tabulating a whole marginal re-uses one
    propagation.
    """
    window = window or LatticeWindow.around(params.y, params.t)
    return _domain_wall_state_cached(params, window)
