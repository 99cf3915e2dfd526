"""Bi-caps, sphere-coverage certificates and non-coverage Monte Carlo.

W_N >= lambda exactly when the bi-caps B_n(lambda) fail to cover the sphere,
so coverage questions and worst-case error questions are interchangeable.
On the circle coverage is decided exactly by an arc sweep; in higher
dimensions a geodesic net gives a three-way certificate.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .estimators import soft_threshold
from .rng import block_ranges, stream
from .sphere import cached_net, sample_uniform_directions

TWO_PI = 2.0 * math.pi
# Angular slack in the circle oracle: arcs that merely touch leave a gap.
ARC_TOL = 1e-12

NOT_COVERED = "not-covered"
COVERED = "covered"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class BiCap:
    """``Cap(axis, theta_plus) U Cap(-axis, theta_minus)``; a zero radius is an empty cap."""

    axis: np.ndarray
    theta_plus: float
    theta_minus: float

    def contains(self, u):
        c = float(np.dot(u, self.axis))
        return ((self.theta_plus > 0.0 and c > math.cos(self.theta_plus))
                or (self.theta_minus > 0.0 and -c > math.cos(self.theta_minus)))

    def shrunk(self, eps):
        return BiCap(self.axis, soft_threshold(self.theta_plus, eps), soft_threshold(self.theta_minus, eps))


def bicap_from_measurement(epsilon_n, delta, lam, axis):
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if abs(epsilon_n) > delta:
        raise DomainError("noise exceeds delta")
    tp = math.acos((delta + epsilon_n) / lam) if delta + epsilon_n < lam else 0.0
    tm = math.acos((delta - epsilon_n) / lam) if delta - epsilon_n < lam else 0.0
    return BiCap(np.asarray(axis, dtype=float), tp, tm)


def bicaps_for_polytope(slabs, lam):
    return [bicap_from_measurement(float(e), slabs.delta, lam, p)
            for p, e in zip(slabs.directions, slabs.offsets)]


def _bicap_arrays(bicaps):
    axes = np.array([b.axis for b in bicaps], dtype=float)
    tp = np.array([b.theta_plus for b in bicaps])
    tm = np.array([b.theta_minus for b in bicaps])
    return axes, tp, tm


def _covered_mask(points, axes, tp, tm):
    """Boolean per point: inside at least one of the bi-caps."""
    if len(axes) == 0:
        return np.zeros(len(points), dtype=bool)
    c = points @ axes.T
    plus = (tp > 0.0) & (c > np.cos(tp))
    minus = (tm > 0.0) & (-c > np.cos(tm))
    return (plus | minus).any(axis=1)


def noncoverage_event(bicaps, net, shrink_eps=None):
    """Three-way coverage certificate from a geodesic net.

    Returns ``(status, witness)``.  A net point outside every bi-cap proves
    non-coverage.  If every net point lies in a bi-cap shrunk by the net
    resolution, every sphere point is covered.  Otherwise the net cannot
    decide.
    """
    eps = net.resolution_eps if shrink_eps is None else shrink_eps
    pts = net.points
    if not bicaps:
        return NOT_COVERED, pts[0]
    axes, tp, tm = _bicap_arrays(bicaps)
    if axes.shape[1] != pts.shape[1]:
        raise DimensionMismatchError(f"bi-cap dimension {axes.shape[1]} != net dimension {pts.shape[1]}")
    inside = _covered_mask(pts, axes, tp, tm)
    if not inside.all():
        return NOT_COVERED, pts[int(np.argmin(inside))]
    shrunk = _covered_mask(pts, axes, np.maximum(tp - eps, 0.0), np.maximum(tm - eps, 0.0))
    if shrunk.all():
        return COVERED, None
    return INDETERMINATE, None


# ---------------------------------------------------------------------------
# exact circle coverage


def arc_noncoverage_exact_d2(arcs):
    """True when the open arcs ``(center - w, center + w)`` leave part of the circle uncovered.

    Angles are measured from the start of the first arc.  The sweep begins
    with whatever wrap-around arcs cover past that origin, then walks the
    arcs in order of start angle looking for a start that the running reach
    does not strictly pass.
    """
    arcs = [(float(c), float(w)) for c, w in arcs if w > 0.0]
    if not arcs:
        return True
    if any(w >= math.pi for _, w in arcs):
        # half-width >= pi: covers all but (at most) the antipode of its centre
        if any(w > math.pi for _, w in arcs):
            return False
        holes = [c + math.pi for c, w in arcs if w >= math.pi]
        return not all(_angle_in_some_arc(h, arcs) for h in holes)
    origin = arcs[0][0] - arcs[0][1]
    spans = sorted(((c - w - origin) % TWO_PI, 2.0 * w) for c, w in arcs)
    reach = max(s + L for s, L in spans) - TWO_PI
    if reach <= ARC_TOL:
        return True
    for s, L in spans:
        if s >= reach - ARC_TOL:
            return True
        reach = max(reach, s + L)
    return reach <= TWO_PI + ARC_TOL


def _angle_in_some_arc(a, arcs):
    for c, w in arcs:
        diff = abs((a - c + math.pi) % TWO_PI - math.pi)
        if diff < w - ARC_TOL:
            return True
    return False


def arc_noncoverage_batch(centers, half_widths):
    """Vectorised circle non-coverage for ``T`` trials of ``N`` arcs, shapes ``(T, N)``.

    Uses the fact that a union of open arcs covers the circle iff every arc's
    starting point lies strictly inside some other arc.  Half-widths must be
    in ``(0, pi)``.
    """
    c = np.asarray(centers, dtype=float)
    w = np.broadcast_to(np.asarray(half_widths, dtype=float), c.shape)
    T, N = c.shape
    starts = c - w
    diff = np.abs((starts[:, :, None] - c[:, None, :] + math.pi) % TWO_PI - math.pi)
    inside = diff < (w[:, None, :] - ARC_TOL)
    idx = np.arange(N)
    inside[:, idx, idx] = False
    return ~inside.any(axis=2).all(axis=1)


def bicaps_to_arcs(bicaps):
    """Circle arcs ``(center angle, half-width)`` of d = 2 bi-caps."""
    arcs = []
    for b in bicaps:
        a = math.atan2(b.axis[1], b.axis[0])
        if b.theta_plus > 0.0:
            arcs.append((a, b.theta_plus))
        if b.theta_minus > 0.0:
            arcs.append((a + math.pi, b.theta_minus))
    return arcs


# ---------------------------------------------------------------------------
# Monte Carlo non-coverage


@dataclass(frozen=True)
class CoverageEstimate:
    noncover_count: int
    cover_count: int
    indeterminate_count: int
    trials: int

    @property
    def point_estimate(self):
        """Non-coverage frequency; indeterminate trials count as covered (a lower estimate)."""
        return self.noncover_count / self.trials

    @property
    def upper_estimate(self):
        return (self.noncover_count + self.indeterminate_count) / self.trials

    @property
    def std_error(self):
        p = self.point_estimate
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)

    def __add__(self, other):
        return CoverageEstimate(self.noncover_count + other.noncover_count,
                                self.cover_count + other.cover_count,
                                self.indeterminate_count + other.indeterminate_count,
                                self.trials + other.trials)


COVERAGE_BLOCK = 4096


def _coverage_block(N, d, theta, n, rng, net):
    if d == 2:
        ang = rng.uniform(0.0, TWO_PI, size=(n, N))
        miss = arc_noncoverage_batch(ang, np.full((n, N), theta))
        k = int(miss.sum())
        return CoverageEstimate(k, n - k, 0, n)
    pts = net.points
    cos_t = math.cos(theta)
    cos_s = math.cos(max(theta - net.resolution_eps, 0.0))
    shrunk_empty = theta <= net.resolution_eps
    nc = cv = ind = 0
    for _ in range(n):
        centers = sample_uniform_directions(d, N, rng)
        g = pts @ centers.T
        best = g.max(axis=1)
        if not (best > cos_t).all():
            nc += 1
        elif not shrunk_empty and (best > cos_s).all():
            cv += 1
        else:
            ind += 1
    return CoverageEstimate(nc, cv, ind, n)


def coverage_noncover_mc(N, d, theta, trials, net_eps=0.05, seed=0, row=0, net_seed=None):
    """Monte-Carlo estimate of the probability that N uniform open caps of radius theta miss a point.

    d = 2 is decided exactly; d >= 3 uses the net certificate and reports
    undecided trials in ``indeterminate_count``.  Trials are drawn in fixed
    blocks keyed by ``(seed, row, block)``.
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not 0.0 < theta < math.pi:
        raise DomainError(f"theta must lie in (0, pi), got {theta!r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    net = None if d == 2 else cached_net(d, float(net_eps), seed if net_seed is None else net_seed)
    total = CoverageEstimate(0, 0, 0, 0)
    for b, start, stop in block_ranges(trials, COVERAGE_BLOCK):
        total = total + _coverage_block(N, d, theta, stop - start, stream(seed, row, b), net)
    return total
