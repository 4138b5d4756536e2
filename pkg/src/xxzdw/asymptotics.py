"""Contour deformation and saddle-point machinery.

Contents: the spectral functions driving the steepest-descent analysis and
their critical points; explicit steep-descent contours through +-i and the
rectangle-with-bumps contour used for the time-independent factors; the
injective-map series that re-expresses the left-most-particle law after
deforming the small contours outward (each map tells which residue circle a
zeta variable landed on); and the edge-scaling series whose coefficients are
rectangle-contour integrals paired with Airy-kernel factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidConfigError, PoleProximityError
from .model import ModelParams
from .quadrature import (ArcSegment, ContourCircle, LineSegment, PiecewiseContour,
                         WorkerPool, discretize_contour, tensor_sum)
from .special import airy_kernel_matrix
from .summation import csum

# ---------------------------------------------------------------------------
# spectral functions
# ---------------------------------------------------------------------------

def spectral(kind: str, z: complex, x: float, t: float) -> complex:
    """G(xi) = x log xi - it (xi + 1/xi)  or  H(zeta) = -x log zeta - it (zeta + 1/zeta).

    Principal branch; points on the negative real axis are rejected.
    """
    z = complex(z)
    if z == 0:
        raise InvalidConfigError("spectral function undefined at 0")
    if z.real < 0 and abs(z.imag) < 1e-14 * abs(z):
        raise PoleProximityError("point on the log branch cut")
    if kind == "G":
        return x * np.log(z) - 1j * t * (z + 1.0 / z)
    if kind == "H":
        return -x * np.log(z) - 1j * t * (z + 1.0 / z)
    raise InvalidConfigError("kind must be 'G' or 'H'")


def critical_points(x: float, t: float):
    """Critical points of G and H; both merge into double points at x = -+2t."""
    root = complex(x * x - 4.0 * t * t) ** 0.5
    xi = ((x + root) / (2j * t), (x - root) / (2j * t))
    zeta = ((-x + root) / (2j * t), (-x - root) / (2j * t))
    return xi, zeta


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

_V_GRADE = 20  # geometric subdivision levels of the V arms toward the vertex


def _graded_breaks():
    return [0.0] + [2.0 ** -k for k in range(_V_GRADE, -1, -1)]


def steep_contour(sign: int, r_outer: float) -> PiecewiseContour:
    """Closed steep-descent contour through +i (sign=+1) or -i (sign=-1).

    V arms leave the vertex at +-30 degrees from horizontal, horizontal runs
    continue at height +-3/2 to the circle of radius ``r_outer``, and the
    circle arc closes the loop.  Positively oriented.  The arms are split
    geometrically toward the vertex: the integrands of interest are weakly
    singular where the two contours face each other at (+i, -i).
    """
    if r_outer <= math.sqrt(3.0):
        raise InvalidConfigError("outer radius must exceed sqrt(3)")
    e1 = np.exp(1j * np.pi / 6)
    e5 = np.exp(5j * np.pi / 6)
    ycap = 1.5
    xcap = math.sqrt(r_outer ** 2 - ycap ** 2)
    th1 = math.atan2(ycap, xcap)
    segs = []
    g = _graded_breaks()
    # left arm outward: i -> i + e5
    for a, b in zip(g[:-1], g[1:]):
        segs.append(LineSegment(1j + a * e5, 1j + b * e5, weight_hint=0.45))
    segs.append(LineSegment(1j + e5, -xcap + 1j * ycap, weight_hint=max(1.0, (xcap - abs(e5.real)) / 2)))
    segs.append(ArcSegment(0.0, r_outer, np.pi - th1, 2.0 * np.pi + th1,
                           weight_hint=max(2.0, r_outer)))
    segs.append(LineSegment(xcap + 1j * ycap, 1j + e1, weight_hint=max(1.0, (xcap - abs(e1.real)) / 2)))
    # right arm inward: i + e1 -> i
    for a, b in zip(g[::-1][:-1], g[::-1][1:]):
        segs.append(LineSegment(1j + a * e1, 1j + b * e1, weight_hint=0.45))
    pc = PiecewiseContour(tuple(segs))
    return pc if sign > 0 else mirror_contour(pc)


def mirror_contour(pc: PiecewiseContour) -> PiecewiseContour:
    """Reflect through the real axis, keeping positive orientation."""
    segs = []
    for seg in reversed(pc.segments):
        if isinstance(seg, LineSegment):
            segs.append(LineSegment(np.conj(seg.z1), np.conj(seg.z0), seg.weight_hint))
        else:
            segs.append(ArcSegment(np.conj(seg.center), seg.radius,
                                   -seg.theta1, -seg.theta0, seg.weight_hint))
    return PiecewiseContour(tuple(segs))


def gamma_hat(half_length: float, eps1: float = 0.2, eps2: float = 0.02,
              delta: float = 0.0, scale: float = 1.0) -> PiecewiseContour:
    """Rectangle of half-height 1 and half-length ``half_length`` with outward
    semicircular bumps on the top edge at i (radius eps1) and i + 2*delta
    (radius eps2); positively oriented; all coordinates multiplied by
    ``scale``.

    The bumps keep the images of the top edge under z -> 2*delta - 1/z
    strictly inside the contour; without them those pole trajectories touch
    the edge.
    """
    if not (0 < eps2 <= eps1 < 1):
        raise InvalidConfigError("need 0 < eps2 <= eps1 < 1")
    b2 = 2.0 * delta
    if delta != 0.0 and abs(b2) < eps1 + eps2:
        raise InvalidConfigError("bumps overlap: |2 delta| < eps1 + eps2")
    if abs(b2) + eps2 >= half_length - eps1:
        raise InvalidConfigError("half_length too small for the bump layout")
    L = half_length
    segs = [
        LineSegment(-L - 1j, L - 1j, weight_hint=L),
        LineSegment(L - 1j, L + 1j, weight_hint=1.0),
    ]
    # top edge right to left with bumps ordered by decreasing real part
    bumps = [(0.0, eps1)] if delta == 0.0 else sorted(
        [(b2, eps2), (0.0, eps1)], key=lambda p: -p[0])
    cur = L
    for c, eps in bumps:
        segs.append(LineSegment(cur + 1j, c + eps + 1j, weight_hint=max(0.5, (cur - c - eps) / 2)))
        segs.append(ArcSegment(c + 1j, eps, 0.0, np.pi, weight_hint=0.5))
        cur = c - eps
    segs.append(LineSegment(cur + 1j, -L + 1j, weight_hint=max(0.5, (cur + L) / 2)))
    segs.append(LineSegment(-L + 1j, -L - 1j, weight_hint=1.0))
    if scale != 1.0:
        scaled = []
        for seg in segs:
            if isinstance(seg, LineSegment):
                scaled.append(LineSegment(scale * seg.z0, scale * seg.z1, seg.weight_hint))
            else:
                scaled.append(ArcSegment(scale * seg.center, scale * seg.radius,
                                         seg.theta0, seg.theta1, seg.weight_hint))
        segs = scaled
    return PiecewiseContour(tuple(segs))


def sample_contour(pc: PiecewiseContour, n: int) -> np.ndarray:
    """n points spread over the contour proportionally to segment length."""
    lengths = np.array([s.length() for s in pc.segments])
    counts = np.maximum(1, np.round(n * lengths / lengths.sum()).astype(int))
    pts = []
    for seg, c in zip(pc.segments, counts):
        s = (np.arange(c) + 0.5) / c
        if isinstance(seg, LineSegment):
            pts.append(seg.z0 + s * (seg.z1 - seg.z0))
        else:
            th = seg.theta0 + s * (seg.theta1 - seg.theta0)
            pts.append(seg.center + seg.radius * np.exp(1j * th))
    return np.concatenate(pts)


def descent_bound_check(t: float, alpha: float, r_outer: float = 4.0,
                        n_samples: int = 400) -> dict:
    """Check Re{G - G(i)} <= 0 on the ascending contour at x = -2t, and the
    t^{1-3 alpha} lower bound outside the ball B(i, t^{-alpha}).

    Returns max_re (should be <= ~1e-12), the empirical constant
    c = min -Re{G-G(i)} / t^{1-3a} over the far samples, and any violations.
    """
    if not (0.25 < alpha < 1.0 / 3.0):
        raise InvalidConfigError("alpha must lie in (1/4, 1/3)")
    x = -2.0 * t
    pc = steep_contour(+1, r_outer)
    pts = sample_contour(pc, n_samples)
    g0 = spectral("G", 1j, x, t)
    re = np.array([spectral("G", p, x, t).real - g0.real for p in pts])
    far = np.abs(pts - 1j) > t ** (-alpha)
    scale = t ** (1.0 - 3.0 * alpha)
    c_emp = float((-re[far] / scale).min()) if far.any() else float("nan")
    violations = [(p, r) for p, r in zip(pts[far], re[far]) if r >= 0]
    return {
        "t": t, "alpha": alpha, "max_re": float(re.max()),
        "n_far": int(far.sum()), "empirical_c": c_emp,
        "violations": violations,
    }


# ---------------------------------------------------------------------------
# injective maps indexing the series terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TauMap:
    """Map {1..N} -> {0..N}, injective away from 0.

    images[k-1] names the contour for the k-th zeta variable: 0 keeps it on
    the large circle, j > 0 means the residue at 1/xi_j was taken.
    """
    images: tuple

    def __post_init__(self):
        pos = [v for v in self.images if v > 0]
        if len(pos) != len(set(pos)):
            raise InvalidConfigError("map must be injective away from 0")
        if any(not (0 <= v <= len(self.images)) for v in self.images):
            raise InvalidConfigError("image out of range")

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def n_zero(self) -> int:
        return sum(1 for v in self.images if v == 0)

    def index_sets(self):
        """K1 (zetas kept), K2 (zetas integrated out), their images tl, J2, J1."""
        k1 = [k for k in range(1, self.n + 1) if self.images[k - 1] == 0]
        k2 = [k for k in range(1, self.n + 1) if self.images[k - 1] > 0]
        tl = [self.images[k - 1] for k in k2]
        j2 = sorted(tl)
        j1 = [j for j in range(1, self.n + 1) if j not in j2]
        return k1, k2, tl, j2, j1


def enumerate_tau(n: int, n_zero: int | None = None) -> list:
    """All admissible maps, optionally restricted to |tau^{-1}(0)| = n_zero."""
    if n > 4:
        raise InvalidConfigError("map enumeration guarded to N <= 4")
    out = []
    for images in itertools.product(range(n + 1), repeat=n):
        pos = [v for v in images if v > 0]
        if len(pos) != len(set(pos)):
            continue
        if n_zero is not None and images.count(0) != n_zero:
            continue
        out.append(TauMap(images))
    return out


# ---------------------------------------------------------------------------
# series terms
# ---------------------------------------------------------------------------

MAX_N_SERIES = 2


def series_radii(delta: float):
    """Concentric radii for the series: R for xi, R' for the kept zetas."""
    if delta == 0.0:
        raise InvalidConfigError("the series requires delta != 0")
    lo = max(2.0 / abs(delta), 2.0 * (1.0 + 2.0 * abs(delta)))
    hi = max(4.0 / abs(delta), 4.0 * (1.0 + 2.0 * abs(delta)))
    r = 1.35 * lo
    rp = 2.2 * hi
    if not (lo < r < hi < rp / 2.0):
        raise ConvergenceError("series radii ordering failed")
    return r, rp


def residue_factor(xi: dict, zeta: dict, tau: TauMap, params: ModelParams):
    """The factor f collecting everything produced by the residues.

    ``xi`` maps index j -> value for all j = 1..N; ``zeta`` maps k -> value
    for k with tau(k) = 0.  Values may be numpy arrays.
    """
    d = params.delta
    y = params.y
    n = tau.n
    k1, k2, tl, j2, j1 = tau.index_sets()
    out = 1.0 + 0.0j
    for ell in range(len(k2)):
        te, ke = tl[ell], k2[ell]
        later_t = set(tl[ell + 1:])
        for k in range(te + 1, n + 1):
            if k in later_t:
                continue
            out = out * (1.0 + xi[te] * xi[k] - 2.0 * d * xi[k]) \
                      / (1.0 + xi[te] * xi[k] - 2.0 * d * xi[te])
        later_k = set(k2[ell + 1:])
        for k in range(ke + 1, n + 1):
            if k in later_k:
                continue
            out = out * (xi[te] + zeta[k] - 2.0 * d * xi[te] * zeta[k]) \
                      / (xi[te] + zeta[k] - 2.0 * d)
        out = out * xi[te] ** (y[ke - 1] - y[te - 1] - 1)
    return out


def core_det(xi: dict, zeta: dict, tau: TauMap, delta: float):
    """Signed minor of the pair-weight matrix left after the residues:
    (-1)^{sum(tau_l - k_l)} det(d(xi_j, zeta_k))_{j in J1, k in K1}."""
    k1, k2, tl, j2, j1 = tau.index_sets()
    sgn = (-1) ** (sum(tl) - sum(k2))

    def dw(a, b):
        return 1.0 / ((1.0 - a * b) * (a + b - 2.0 * delta * a * b))

    if not j1:
        return sgn + 0.0j if np.isscalar(next(iter(xi.values()), 1.0)) else sgn * np.ones(1)
    if len(j1) == 1:
        return sgn * dw(xi[j1[0]], zeta[k1[0]])
    if len(j1) == 2:
        return sgn * (dw(xi[j1[0]], zeta[k1[0]]) * dw(xi[j1[1]], zeta[k1[1]])
                      - dw(xi[j1[0]], zeta[k1[1]]) * dw(xi[j1[1]], zeta[k1[0]]))
    raise InvalidConfigError("minor expansion implemented for |J1| <= 2")


def core_integrand(xi: dict, zeta: dict, tau: TauMap, params: ModelParams, x: int):
    """The residue-reduced integrand factor depending on J1/K1 variables only.

    For the all-zeros map this is pointwise the same function as the plain
    2N-fold integrand of the cumulative law.
    """
    d = params.delta
    y = params.y
    k1, k2, tl, j2, j1 = tau.index_sets()
    out = core_det(xi, zeta, tau, d)
    for j in j1:
        for k in k1:
            out = out * (xi[j] + zeta[k] - 2.0 * d * xi[j] * zeta[k])
    for ai, a in enumerate(j1):
        for b in j1[ai + 1:]:
            out = out / (1.0 + xi[a] * xi[b] - 2.0 * d * xi[a])
    for ai, a in enumerate(k1):
        for b in k1[ai + 1:]:
            out = out / (1.0 + zeta[a] * zeta[b] - 2.0 * d * zeta[a])
    for j in j1:
        out = out * xi[j] ** (x - y[j - 1] - 1) * np.exp(-1j * params.t * (xi[j] + 1.0 / xi[j] - 2.0 * d))
    for k in k1:
        out = out * zeta[k] ** (x - y[k - 1] - 1) * np.exp(+1j * params.t * (zeta[k] + 1.0 / zeta[k] - 2.0 * d))
    return out


def _series_guard(params: ModelParams):
    if params.n > MAX_N_SERIES:
        raise InvalidConfigError(f"series evaluation guarded to N <= {MAX_N_SERIES}")
    if not (0.5 <= abs(params.delta) <= 1.5):
        raise InvalidConfigError("series conditioning guard: |delta| must lie in [0.5, 1.5]")
    if params.t > 0.5:
        raise InvalidConfigError("series conditioning guard: t <= 0.5")


def series_term(params: ModelParams, x: int, tau: TauMap, m_xi: int = 32,
                m_ze: int = 64, pool: WorkerPool | None = None) -> complex:
    """One series term: N xi variables on C_R plus |K1| zeta variables on C_R'."""
    n = params.n
    r, rp = series_radii(params.delta)
    gx = discretize_contour(ContourCircle(radius=r), m_xi)
    gz = discretize_contour(ContourCircle(radius=rp), m_ze)
    k1, _, _, _, _ = tau.index_sets()
    dims = [m_xi] * n + [m_ze] * len(k1)

    def term_block(*idx):
        xi = {j + 1: gx.nodes[idx[j]] for j in range(n)}
        zeta = {k: gz.nodes[idx[n + i]] for i, k in enumerate(k1)}
        w = gx.weights[idx[0]]
        for j in range(1, n):
            w = w * gx.weights[idx[j]]
        for i in range(len(k1)):
            w = w * gz.weights[idx[n + i]]
        return (w * core_integrand(xi, zeta, tau, params, x)
                * residue_factor(xi, zeta, tau, params))

    return tensor_sum(term_block, dims, pool)


def series_prob_geq(params: ModelParams, x: int, pool: WorkerPool | None = None,
                    rtol: float = 1e-8, atol: float = 1e-9) -> tuple:
    """P(left-most particle >= x) as the sum over all admissible maps.

    Returns (value, error_estimate); each term is refined by doubling both
    node densities.
    """
    _series_guard(params)
    total = 0.0 + 0.0j
    err = 0.0
    for tau in enumerate_tau(params.n):
        m_xi, m_ze = 32, 64
        prev = series_term(params, x, tau, m_xi, m_ze, pool)
        ok = False
        while 2 * m_xi <= 128 and 2 * m_ze <= 512:
            m_xi *= 2
            m_ze *= 2
            cur = series_term(params, x, tau, m_xi, m_ze, pool)
            diff = abs(cur - prev)
            if diff <= max(atol, rtol * max(abs(cur), 1.0)):
                ok = True
                break
            prev = cur
        if not ok:
            raise ConvergenceError(f"series term for {tau.images} did not converge", cur, prev)
        total += cur
        err += diff
    if abs(total.imag) > max(1e-6, 10 * err):
        raise ConvergenceError(f"series value has imaginary part {total.imag}")
    return float(total.real), max(err, abs(total.imag))


def deformed_term_direct(params: ModelParams, x: int, images,
                         m_xi: int = 32, m_ze: int = 32, m_small: int = 32) -> complex:
    """Direct quadrature of the un-reduced 2N-fold integrand with each zeta
    variable on the circle named by ``images``: the large circle for image 0,
    a negatively oriented circle of radius 1/(2R) around 1/xi_j for image j.

    Accepts repeated positive images on purpose: those terms must vanish,
    and this function is how that is verified.
    """
    images = tuple(images.images) if isinstance(images, TauMap) else tuple(images)
    n = params.n
    if n != 2:
        raise InvalidConfigError("direct deformed quadrature implemented for N = 2")
    d = params.delta
    y = params.y
    r, rp = series_radii(d)
    # distinct xi radii keep 1/xi_1 and 1/xi_2 separated on the node grid,
    # so each residue circle encloses exactly its own pole; both radii stay
    # inside the admissible window, leaving the value unchanged
    r2 = 1.05 * r
    gx1 = discretize_contour(ContourCircle(radius=r), m_xi)
    gx2 = discretize_contour(ContourCircle(radius=r2), m_xi)
    gz = discretize_contour(ContourCircle(radius=rp), m_ze)
    sep_min = (r2 - r) / (r * r2)
    rr = min(1.0 / (2.0 * r), 0.4 * sep_min)
    th = 2.0 * np.pi * np.arange(m_small) / m_small
    ring = np.exp(1j * th)

    def dw(a, b):
        return 1.0 / ((1.0 - a * b) * (a + b - 2.0 * d * a * b))

    total = []
    for ia in range(m_xi):
        for ib in range(m_xi):
            xi = {1: gx1.nodes[ia], 2: gx2.nodes[ib]}
            wxi = gx1.weights[ia] * gx2.weights[ib]
            zg = []
            for k in (1, 2):
                img = images[k - 1]
                if img == 0:
                    zg.append((gz.nodes, gz.weights))
                else:
                    center = 1.0 / xi[img]
                    scale = rr * (1.0 if k == 1 else 0.8)
                    nodes = center + scale * ring
                    zg.append((nodes, -(scale * ring) / m_small))  # negative orientation
            z1 = zg[0][0][:, None]
            w1 = zg[0][1][:, None]
            z2 = zg[1][0][None, :]
            w2 = zg[1][1][None, :]
            num = ((xi[1] + z1 - 2 * d * xi[1] * z1) * (xi[1] + z2 - 2 * d * xi[1] * z2)
                   * (xi[2] + z1 - 2 * d * xi[2] * z1) * (xi[2] + z2 - 2 * d * xi[2] * z2))
            den = (1.0 + xi[1] * xi[2] - 2 * d * xi[1]) * (1.0 + z1 * z2 - 2 * d * z1)
            det = dw(xi[1], z1) * dw(xi[2], z2) - dw(xi[1], z2) * dw(xi[2], z1)
            fac = (xi[1] ** (x - y[0] - 1) * np.exp(-1j * params.t * (xi[1] + 1 / xi[1] - 2 * d))
                   * xi[2] ** (x - y[1] - 1) * np.exp(-1j * params.t * (xi[2] + 1 / xi[2] - 2 * d))
                   * z1 ** (x - y[0] - 1) * np.exp(1j * params.t * (z1 + 1 / z1 - 2 * d))
                   * z2 ** (x - y[1] - 1) * np.exp(1j * params.t * (z2 + 1 / z2 - 2 * d)))
            total.append(wxi * (w1 * w2 * num / den * det * fac).sum())
    return csum(np.array(total))


def steep_series_prob_geq_n1(params: ModelParams, x: int, m: int = 48) -> float:
    """N = 1 cumulative law via the steep-descent contour pair plus the
    rectangle term; equals the concentric-circle series value."""
    if params.n != 1:
        raise InvalidConfigError("steep-contour route implemented for N = 1")
    r, rp = series_radii(params.delta)
    gp = discretize_contour(steep_contour(+1, r), m)
    gm = discretize_contour(steep_contour(-1, rp), m)
    tau0 = TauMap((0,))
    xi = {1: gp.nodes[:, None]}
    ze = {1: gm.nodes[None, :]}
    vals = (gp.weights[:, None] * gm.weights[None, :]
            * core_integrand(xi, ze, tau0, params, x))
    pair = csum(vals.ravel())
    rect = gamma_hat(math.sqrt(r * r - 1.0), delta=params.delta)
    gr = discretize_contour(rect, m)
    y0 = params.y[0]
    unit = csum(gr.weights * gr.nodes ** (y0 - y0 - 1))
    return float((pair + unit).real)


# ---------------------------------------------------------------------------
# edge-scaling series coefficients
# ---------------------------------------------------------------------------

def nu_counts(sigma, s_set, j: int) -> tuple:
    """Inversion counts of sigma restricted to the complement of S at slot j.

    Returns (nu1, nu2, nu) with nu = j - sigma(j) + nu2 - nu1; for a full
    permutation (S empty) nu vanishes identically.
    """
    comp = [k for k in range(1, len(sigma) + 1) if k not in s_set]
    if j not in comp:
        raise InvalidConfigError("slot j must lie in the complement of S")
    nu1 = sum(1 for jp in comp if jp < j and sigma[jp - 1] > sigma[j - 1])
    nu2 = sum(1 for jp in comp if jp > j and sigma[j - 1] > sigma[jp - 1])
    return nu1, nu2, j - sigma[j - 1] + nu2 - nu1


def b_factor(xi: dict, sigma, s_set, delta: float):
    """Product over inverted pairs in the complement of S of
    (1 + xi_{s(k)} xi_{s(j)} - 2 d xi_{s(j)}) / (1 + xi_{s(k)} xi_{s(j)} - 2 d xi_{s(k)})."""
    comp = [k for k in range(1, len(sigma) + 1) if k not in s_set]
    out = 1.0 + 0.0j
    for ji, j in enumerate(comp):
        for k in comp[ji + 1:]:
            if sigma[j - 1] > sigma[k - 1]:
                a = xi[sigma[k - 1]]
                b = xi[sigma[j - 1]]
                out = out * (1.0 + a * b - 2.0 * delta * b) / (1.0 + a * b - 2.0 * delta * a)
    return out


_RECT_BASE_SCALE = 1.1
_RECT_SCALE_RATIO = 1.25


def _saddle_grids(n_vars: int, delta: float, half_length: float, m: int):
    """Nested plain rectangles replacing the bumped contour for quadrature.

    Distinct scales keep every pole trajectory a finite distance from every
    contour; all scaled rectangles enclose exactly the poles the bumped
    rectangle encloses, so the value is unchanged.
    """
    grids = []
    for k in range(n_vars):
        s = _RECT_BASE_SCALE * _RECT_SCALE_RATIO ** k
        L = half_length
        rect = PiecewiseContour((
            LineSegment(s * (-L - 1j), s * (L - 1j), weight_hint=L),
            LineSegment(s * (L - 1j), s * (L + 1j), weight_hint=1.0),
            LineSegment(s * (L + 1j), s * (-L + 1j), weight_hint=L),
            LineSegment(s * (-L + 1j), s * (-L - 1j), weight_hint=1.0),
        ))
        grids.append(discretize_contour(rect, m))
    return grids


def saddle_coeff(sigma, s_set, params: ModelParams, half_length: float | None = None,
                 m: int = 40, pool: WorkerPool | None = None) -> complex:
    """Coefficient F(sigma, S) of the edge-scaling series.

    An |S^c|-fold rectangle-contour integral of the inversion-ratio product,
    the map-inversion power factors, and the initial-condition powers; the
    i-prefactors follow the convention that pairs them with bare Airy-kernel
    factors.
    """
    n = params.n
    sigma = tuple(sigma)
    s_set = frozenset(s_set)
    comp = [k for k in range(1, n + 1) if k not in s_set]
    if not comp:
        return 1.0 + 0.0j
    d = params.delta
    y = params.y
    if half_length is None:
        half_length = 2.0 * abs(d) + 4.0
    vars_sorted = sorted(sigma[j - 1] for j in comp)
    grids = {v: g for v, g in zip(vars_sorted, _saddle_grids(len(comp), d, half_length, m))}
    nus = {j: nu_counts(sigma, s_set, j)[2] for j in comp}

    def term_block(*idx):
        xi = {v: grids[v].nodes[idx[i]] for i, v in enumerate(vars_sorted)}
        w = grids[vars_sorted[0]].weights[idx[0]]
        for i in range(1, len(vars_sorted)):
            w = w * grids[vars_sorted[i]].weights[idx[i]]
        out = w * b_factor(xi, sigma, s_set, d)
        for j in comp:
            z = xi[sigma[j - 1]]
            nu = nus[j]
            if nu:
                out = out * ((z - (2.0 * d + 1j)) / ((2j * d + 1.0) * z - 1j)) ** nu
            out = out * (1j * z) ** (y[j - 1] - y[sigma[j - 1] - 1] - 1)
        return out

    val = (1j ** len(comp)) * tensor_sum(term_block, [len(grids[v]) for v in vars_sorted], pool)
    return complex(val)


def saddle_coeff_refined(sigma, s_set, params: ModelParams, m: int = 40,
                         pool: WorkerPool | None = None) -> tuple:
    v1 = saddle_coeff(sigma, s_set, params, m=m, pool=pool)
    v2 = saddle_coeff(sigma, s_set, params, m=2 * m, pool=pool)
    return v2, abs(v2 - v1)


def signed_empty_sum(params: ModelParams, m: int = 40, pool: WorkerPool | None = None) -> complex:
    """sum over permutations of sgn(sigma) F(sigma, {}); identically 1."""
    total = 0.0 + 0.0j
    for sigma in itertools.permutations(range(1, params.n + 1)):
        sgn = (-1) ** len([1 for i in range(params.n) for j in range(i + 1, params.n)
                           if sigma[i] > sigma[j]])
        total += sgn * saddle_coeff(sigma, frozenset(), params, m=m, pool=pool)
    return total


def conjecture_partial_sum(params: ModelParams, s: float, m: int = 40,
                           pool: WorkerPool | None = None) -> float:
    """Partial sum of the conjectured edge-scaling series at finite N and t.

    v_k = (y_k + 1)/t^{1/3}; the sum runs over all (sigma, S) pairs with
    coefficients F(sigma, S) and Airy-kernel products at s + v.  No limit is
    claimed; this is the finite partial sum only.  At delta = 0 the sum
    collapses to det(I - t^{-1/3} K_Ai(s + v_j, s + v_k)), which is used as
    a fast path (and is tested against the explicit sum at small N).
    """
    n = params.n
    t = params.t
    if t <= 0:
        raise InvalidConfigError("edge scaling needs t > 0")
    v = np.array([(yk + 1.0) / t ** (1.0 / 3.0) for yk in params.y])
    if params.delta == 0.0:
        return delta0_partial_sum_det(params, s)
    if n > 3:
        raise InvalidConfigError("explicit (sigma, S) sum guarded to N <= 3")
    kai = airy_kernel_matrix(s + v, s + v, panels=16)
    tp = t ** (-1.0 / 3.0)
    total = 0.0 + 0.0j
    for sigma in itertools.permutations(range(1, n + 1)):
        sgn = (-1) ** len([1 for i in range(n) for j in range(i + 1, n) if sigma[i] > sigma[j]])
        for r in range(n + 1):
            for s_sub in itertools.combinations(range(1, n + 1), r):
                s_set = frozenset(s_sub)
                coeff = saddle_coeff(sigma, s_set, params, m=m, pool=pool)
                prod = 1.0
                for k in s_sub:
                    prod *= kai[sigma[k - 1] - 1, k - 1]
                total += sgn * (-1.0) ** r * tp ** r * coeff * prod
    return float(total.real)


def delta0_partial_sum_det(params: ModelParams, s: float) -> float:
    """det(I - t^{-1/3} K_Ai(s + v_j, s + v_k)); the value the explicit sum
    takes at delta = 0, valid for any N."""
    t = params.t
    v = np.array([(yk + 1.0) / t ** (1.0 / 3.0) for yk in params.y])
    kai = airy_kernel_matrix(s + v, s + v, panels=16)
    mat = np.eye(params.n) - t ** (-1.0 / 3.0) * kai
    return float(np.linalg.det(mat))


# ---------------------------------------------------------------------------
# scaling-rate checks
# ---------------------------------------------------------------------------

def scaled_points(t: float, xi_tilde: complex, zeta_tilde: complex):
    """Saddle-neighbourhood points xi = i(1 + xi~ t^{-1/3}), zeta = -i(1 - z~ t^{-1/3})."""
    e = t ** (-1.0 / 3.0)
    return 1j * (1.0 + xi_tilde * e), -1j * (1.0 - zeta_tilde * e)


def u_factor_limit(xi_tau: complex, delta: float) -> complex:
    """Limit of (1 + xi_t xi_k - 2 d xi_k)/(1 + xi_t xi_k - 2 d xi_t) as
    xi_k -> i: equals (i xi_t - (2 d i - 1)) / ((i - 2 d) xi_t + 1)."""
    return (1j * xi_tau - (2.0 * delta * 1j - 1.0)) / ((1j - 2.0 * delta) * xi_tau + 1.0)


def v_factor_limit(xi_tau: complex, delta: float) -> complex:
    """Limit of (xi_t + z - 2 d xi_t z)/(xi_t + z - 2 d) as z -> -i."""
    return ((1.0 + 2j * delta) * xi_tau - 1j) / (xi_tau - (2.0 * delta + 1j))


def residue_factor_limit(tau: TauMap, xi_j2: dict, params: ModelParams):
    """Leading term of the residue factor under the edge scaling: the
    inversion-ratio product times the map-inversion powers and initial powers."""
    d = params.delta
    y = params.y
    k1, k2, tl, j2, j1 = tau.index_sets()
    out = 1.0 + 0.0j
    # pairs inside K2 with inverted images
    for ai in range(len(k2)):
        for bi in range(ai + 1, len(k2)):
            if tl[bi] < tl[ai]:
                a = xi_j2[tl[bi]]
                b = xi_j2[tl[ai]]
                out = out * (1.0 + a * b - 2.0 * d * b) / (1.0 + a * b - 2.0 * d * a)
    for ell, (te, ke) in enumerate(zip(tl, k2)):
        nu1 = sum(1 for jp, tp in zip(k2, tl) if jp < ke and tp > te)
        nu2 = sum(1 for jp, tp in zip(k2, tl) if jp > ke and te > tp)
        nu = ke - te + nu2 - nu1
        base = (xi_j2[te] - (2.0 * d + 1j)) / ((2j * d + 1.0) * xi_j2[te] - 1j)
        out = out * base ** nu * xi_j2[te] ** (y[ke - 1] - y[te - 1] - 1)
    return out


def scaling_rate_check(params_delta: float, t_values=(1e2, 1e3, 1e4),
                       xi_tilde: complex = 0.7 + 0.4j, zeta_tilde: complex = -0.3 + 0.5j,
                       xi_tau: complex = 2.0 + 1.5j) -> dict:
    """Error of the residue-factor approximation at scaled points.

    Uses N = 2 with the map (2 -> 1): one zeta stays, one residue was taken.
    The error against the scaling limit must decay like t^{-1/3}; the ratio
    across a decade of t is reported for the rate test.
    """
    params0 = ModelParams(params_delta, 0.1, (1, 3))
    tau = TauMap((0, 1))
    errors = []
    for t in t_values:
        xi_s, ze_s = scaled_points(t, xi_tilde, zeta_tilde)
        xi = {1: xi_tau, 2: xi_s}
        zeta = {1: ze_s}
        exact = residue_factor(xi, zeta, tau, params0)
        limit = residue_factor_limit(tau, {1: xi_tau}, params0)
        errors.append(abs(exact - limit))
    rates = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    expected = [(t_values[i + 1] / t_values[i]) ** (1.0 / 3.0) for i in range(len(t_values) - 1)]
    return {
        "t_values": tuple(t_values), "errors": errors,
        "rate_ratios": rates, "expected_ratios": expected,
        "within_factor_2": all(e / 2 <= r <= 2 * e for r, e in zip(rates, expected)),
    }
