"""Contours, quadrature grids, tensor-product contour integration, and small
dense complex determinants.

Conventions
-----------
* Every weight absorbs the factor ``1/(2*pi*i)``, so a positively oriented
  circle around a simple pole integrates to the plain residue.
* Circles are discretized with the equispaced trapezoidal rule, which is
  spectrally accurate for integrands analytic in an annulus around the
  contour.  Piecewise contours get composite Gauss-Legendre panels.
* All reductions run through :mod:`xxzdw.summation` in a fixed order, so
  values are bit-reproducible for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidConfigError
from .summation import csum, csum_pairs

MAX_NODES_PER_DIM = 512
GL_ORDER = 16

_gl_x, _gl_w = np.polynomial.legendre.leggauss(GL_ORDER)


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourCircle:
    center: complex = 0.0 + 0.0j
    radius: float = 1.0
    orientation: int = 1  # +1 counterclockwise, -1 clockwise

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidConfigError(f"circle radius must be positive, got {self.radius}")
        if self.orientation not in (1, -1):
            raise InvalidConfigError("orientation must be +1 or -1")


@dataclass(frozen=True)
class LineSegment:
    z0: complex
    z1: complex
    #: relative quadrature effort; discretize multiplies this by the density
    weight_hint: float = 1.0

    def length(self):
        return abs(self.z1 - self.z0)


@dataclass(frozen=True)
class ArcSegment:
    center: complex
    radius: float
    theta0: float
    theta1: float  # traversed from theta0 to theta1 (either direction)
    weight_hint: float = 1.0

    def endpoint(self, which):
        th = self.theta0 if which == 0 else self.theta1
        return self.center + self.radius * np.exp(1j * th)

    def length(self):
        return abs(self.theta1 - self.theta0) * self.radius


@dataclass(frozen=True)
class PiecewiseContour:
    segments: tuple
    closed: bool = True

    def __post_init__(self):
        pts = []
        for seg in self.segments:
            if isinstance(seg, LineSegment):
                if seg.length() == 0.0:
                    raise InvalidConfigError("degenerate zero-length segment")
                pts.append((seg.z0, seg.z1))
            elif isinstance(seg, ArcSegment):
                if seg.length() == 0.0 or seg.radius <= 0:
                    raise InvalidConfigError("degenerate arc segment")
                pts.append((seg.endpoint(0), seg.endpoint(1)))
            else:
                raise InvalidConfigError(f"unknown segment type {type(seg)!r}")
        for (_, e), (s, _) in zip(pts, pts[1:]):
            if abs(e - s) > 1e-12:
                raise InvalidConfigError(f"segments do not join: {e} vs {s}")
        if self.closed and abs(pts[-1][1] - pts[0][0]) > 1e-12:
            raise InvalidConfigError("contour is not closed")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass
class QuadGrid:
    nodes: np.ndarray
    weights: np.ndarray  # include 1/(2 pi i) and orientation
    refinement_level: int = 0
    contour: object = None
    m: int = 0  # density parameter used to build this grid

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise InvalidConfigError("nodes and weights must have equal length")

    def __len__(self):
        return len(self.nodes)

    def refined(self) -> "QuadGrid":
        g = discretize_contour(self.contour, 2 * self.m)
        g.refinement_level = self.refinement_level + 1
        return g


def discretize_contour(contour, m: int) -> QuadGrid:
    """Build a quadrature grid with density parameter ``m``.

    For a circle, ``m`` is the number of equispaced trapezoidal nodes.  For a
    piecewise contour, each segment receives composite Gauss-Legendre panels;
    doubling ``m`` doubles the panel count of every segment.
    """
    if m < 8:
        raise InvalidConfigError(f"need at least 8 nodes, got {m}")
    if isinstance(contour, ContourCircle):
        th = 2.0 * np.pi * np.arange(m) / m
        z = contour.center + contour.radius * np.exp(1j * th)
        # dz/(2 pi i) per node: orientation * rho * e^{i theta} / m
        w = contour.orientation * contour.radius * np.exp(1j * th) / m
        return QuadGrid(z, w, 0, contour, m)
    if isinstance(contour, PiecewiseContour):
        nodes, weights = [], []
        for seg in contour.segments:
            panels = max(1, int(math.ceil(seg.weight_hint * m / 32.0)))
            breaks = np.linspace(0.0, 1.0, panels + 1)
            for a, b in zip(breaks[:-1], breaks[1:]):
                s = 0.5 * (a + b) + 0.5 * (b - a) * _gl_x
                w = 0.5 * (b - a) * _gl_w
                if isinstance(seg, LineSegment):
                    dz = seg.z1 - seg.z0
                    nodes.append(seg.z0 + s * dz)
                    weights.append(w * dz)
                else:
                    th = seg.theta0 + s * (seg.theta1 - seg.theta0)
                    z = seg.center + seg.radius * np.exp(1j * th)
                    nodes.append(z)
                    weights.append(w * (seg.theta1 - seg.theta0) * 1j * seg.radius * np.exp(1j * th))
        z = np.concatenate(nodes)
        w = np.concatenate(weights) / (2j * np.pi)
        return QuadGrid(z, w, 0, contour, m)
    raise InvalidConfigError(f"cannot discretize {type(contour)!r}")


# ---------------------------------------------------------------------------
# deterministic tensor-product reduction
# ---------------------------------------------------------------------------

BLOCK_SIZE = 1 << 16


class WorkerPool:
    """Thin deterministic map over fixed-size work blocks.

    Results are combined in submission order whatever the completion order,
    so worker count never changes a single bit of the output.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def map(self, fn, items):
        if self.workers == 1:
            return [fn(it) for it in items]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            return list(ex.map(fn, items))


_SERIAL = WorkerPool(1)


def tensor_sum(term_block, sizes, pool: WorkerPool | None = None, block_size: int = BLOCK_SIZE) -> complex:
    """Sum ``term_block`` over the full index product of ``sizes``.

    ``term_block`` receives one int64 index array per dimension (all of equal
    block length) and returns the corresponding complex term values.  The
    block decomposition is fixed by ``block_size`` alone.
    """
    pool = pool or _SERIAL
    total = 1
    for s in sizes:
        total *= int(s)
    starts = range(0, total, block_size)

    def one_block(lo):
        hi = min(lo + block_size, total)
        flat = np.arange(lo, hi, dtype=np.int64)
        idx = np.unravel_index(flat, sizes)
        return csum(np.asarray(term_block(*idx), dtype=np.complex128))

    partials = pool.map(one_block, starts)
    return csum_pairs(partials)


def integrate_grids(f, grids, pool: WorkerPool | None = None) -> complex:
    """One-shot tensor-product contour integral of ``f`` over ``grids``.

    ``f`` is vectorized: it gets one complex node array per dimension and
    returns the integrand values.  Weights are applied here.
    """
    nodes = [g.nodes for g in grids]
    wts = [g.weights for g in grids]

    def term_block(*idx):
        vals = f(*(n[i] for n, i in zip(nodes, idx)))
        w = wts[0][idx[0]]
        for wi, ii in zip(wts[1:], idx[1:]):
            w *= wi[ii]
        return vals * w

    return tensor_sum(term_block, [len(g) for g in grids], pool)


def integrate_nd(f, contours, m0: int = 32, rtol: float = 1e-10, atol: float = 1e-12,
                 max_m: int = MAX_NODES_PER_DIM, pool: WorkerPool | None = None):
    """Adaptive tensor-product integral of ``f`` over ``contours``.

    Refines by doubling the per-dimension density until two successive
    estimates agree to tolerance.  Returns ``(value, error_estimate)`` where
    the estimate is the last observed doubling difference.
    """
    if not contours:
        raise InvalidConfigError("need at least one contour")
    m = m0
    prev = integrate_grids(f, [discretize_contour(c, m) for c in contours], pool)
    while 2 * m <= max_m:
        m *= 2
        cur = integrate_grids(f, [discretize_contour(c, m) for c in contours], pool)
        err = abs(cur - prev)
        if err <= max(atol, rtol * abs(cur)):
            if not np.isfinite(cur):
                raise ConvergenceError("non-finite integral", cur, prev)
            return cur, err
        prev = cur
    raise ConvergenceError(
        f"contour integral did not converge by m={m} per dimension",
        last=cur if 'cur' in locals() else prev, previous=prev)


# ---------------------------------------------------------------------------
# dense complex determinant
# ---------------------------------------------------------------------------

def det_complex(a) -> complex:
    """Determinant by partial-pivot LU; returns exact 0 on a zero pivot column."""
    a = np.array(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidConfigError(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidConfigError("matrix has non-finite entries")
    n = a.shape[0]
    det = 1.0 + 0.0j
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0:
            return 0.0 + 0.0j
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k + 1:])
    return complex(det)
