"""Geometry on the unit sphere S^{d-1}.

Uniform sampling, geodesic distance, spherical caps and their relative
measure, the normalising constant C_d, the density of |<x, phi>| for a
uniform direction phi, and geodesic epsilon-nets.
"""

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DimensionMismatchError,
    DomainError,
    InvalidDimensionError,
    NetConstructionError,
)
from .quadrature import adaptive_simpson

UNIT_TOL = 1e-12
CAP_QUAD_TOL = 1e-10


def unit_vector(coords):
    """Validate ``coords`` as a point of S^{d-1} and return it as a float array."""
    u = np.asarray(coords, dtype=float).reshape(-1)
    if u.size < 1:
        raise InvalidDimensionError("unit vector needs dimension >= 1")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError(f"vector has norm {np.linalg.norm(u)!r}, expected 1")
    return u


def _check_same_dim(u, v):
    if np.shape(u) != np.shape(v):
        raise DimensionMismatchError(f"dimension mismatch: {np.shape(u)} vs {np.shape(v)}")


def sample_uniform_directions(d, size, rng):
    """Draw ``size`` i.i.d. uniform points of S^{d-1}, shape ``(size, d)``.

    Normalised standard Gaussians; rotation invariant by construction.
    """
    if d < 1:
        raise InvalidDimensionError(f"d must be >= 1, got {d}")
    g = rng.standard_normal((size, d))
    norms = np.linalg.norm(g, axis=1)
    # A zero Gaussian vector has probability zero; redraw rather than divide by it.
    bad = norms == 0.0
    while bad.any():
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
        bad = norms == 0.0
    return g / norms[:, None]


def sample_uniform_direction(d, rng):
    return sample_uniform_directions(d, 1, rng)[0]


def geodesic_distance(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_same_dim(u, v)
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


@lru_cache(maxsize=None)
def gamma_ratio_constant(d):
    """C_d = Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)) for d >= 2."""
    if d < 2:
        raise DomainError(f"C_d is defined for d >= 2, got {d}")
    if d <= 300:
        # C_{d+2} = C_d * d / (d - 1) from C_2 = 1/pi and C_3 = 1/2, in exact
        # rationals, so small cases round once (C_3 is exactly 0.5).
        k = 3 if d % 2 else 2
        ratio = Fraction(1, 2) if d % 2 else Fraction(1)
        while k < d:
            ratio *= Fraction(k, k - 1)
            k += 2
        return float(ratio) if d % 2 else float(ratio) / math.pi
    return math.exp(math.lgamma(d / 2) - math.lgamma((d - 1) / 2) - 0.5 * math.log(math.pi))


def cap_relative_measure(d, theta, tol=CAP_QUAD_TOL):
    """Fraction of S^{d-1} covered by an open cap of angular radius ``theta``.

    Valid for ``0 < theta < pi/2``; evaluated by adaptive Simpson.
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not 0.0 < theta < 0.5 * math.pi:
        raise DomainError(f"theta must lie in (0, pi/2), got {theta!r}")
    return _cap_measure(d, theta, tol)


def _cap_measure(d, theta, tol):
    cd = gamma_ratio_constant(d)
    if d == 2:
        return cd * theta
    p = d - 2
    return cd * adaptive_simpson(lambda u: math.sin(u) ** p, 0.0, theta, tol)


def cap_measure_any(d, theta):
    """Relative cap measure for any radius in ``[0, pi]`` (via hemisphere symmetry)."""
    if theta <= 0.0:
        return 0.0
    if theta >= math.pi:
        return 1.0
    if theta == 0.5 * math.pi:
        return 0.5
    if theta < 0.5 * math.pi:
        return _cap_measure(d, theta, CAP_QUAD_TOL)
    return 1.0 - _cap_measure(d, math.pi - theta, CAP_QUAD_TOL)


def inner_product_abs_pdf(d, z):
    """Density of |<x0, phi>| for phi uniform on S^{d-1}: 2 C_d (1 - z^2)^((d-3)/2) on [0, 1]."""
    if not 0.0 <= z <= 1.0:
        return 0.0
    e = 0.5 * (d - 3)
    if e == 0:
        return 2.0 * gamma_ratio_constant(d)
    base = 1.0 - z * z
    if base == 0.0:
        return math.inf if e < 0 else 0.0
    return 2.0 * gamma_ratio_constant(d) * base ** e


@dataclass(frozen=True)
class Cap:
    """Open cap ``{u : <u, center> > cos(radius_theta)}``; radius 0 is empty."""

    center: np.ndarray
    radius_theta: float

    def __post_init__(self):
        if not 0.0 <= self.radius_theta < math.pi:
            raise DomainError(f"cap radius must lie in [0, pi), got {self.radius_theta!r}")

    def contains(self, point):
        return cap_contains(self, point)


def cap_contains(cap, point):
    point = np.asarray(point, dtype=float)
    _check_same_dim(cap.center, point)
    if cap.radius_theta == 0.0:
        return False
    return bool(np.dot(point, cap.center) > math.cos(cap.radius_theta))


@dataclass(frozen=True)
class GeodesicNet:
    points: np.ndarray  # (M, d)
    resolution_eps: float

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def net_cardinality_bound(d, eps):
    return (8.0 / eps) ** (d - 1)


def circle_net(eps):
    """Equally spaced points on S^1 with spacing at most ``2 eps``."""
    m = math.ceil(math.pi / eps)
    ang = 2.0 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(ang), np.sin(ang)])


def build_geodesic_net(d, eps, rng=None, streak_factor=200, chunk=4096):
    """Geodesic ``eps``-net of S^{d-1}.

    For d = 2 the net is the deterministic equally spaced circle.  For d >= 3
    a maximal eps-separated set is grown greedily from uniform candidates and
    declared complete after ``streak_factor * len(net)`` consecutive rejections.
    """
    if d < 2:
        raise InvalidDimensionError(f"nets are built for d >= 2, got {d}")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if d == 2:
        pts = circle_net(eps)
    else:
        if rng is None:
            raise ValueError("a random stream is required for d >= 3")
        pts = _greedy_net(d, eps, rng, streak_factor, chunk)
    if len(pts) > net_cardinality_bound(d, eps):
        raise NetConstructionError(
            f"net has {len(pts)} points, above the (8/eps)^(d-1) bound {net_cardinality_bound(d, eps):.6g}")
    return GeodesicNet(pts, float(eps))


def _greedy_net(d, eps, rng, streak_factor, chunk):
    cos_eps = math.cos(eps)
    cap = int(net_cardinality_bound(d, eps)) + 1
    net = np.empty((min(cap, 1024), d))
    m = 0
    streak = 0
    while True:
        cand = sample_uniform_directions(d, chunk, rng)
        m0 = m
        if m:
            # the chordal nearest neighbour is also the geodesic one
            _, idx = cKDTree(net[:m]).query(cand)
            near = np.einsum("ij,ij->i", cand, net[idx]) >= cos_eps
        else:
            near = np.zeros(chunk, dtype=bool)
        # Rejections between two open candidates are counted in bulk; only
        # candidates that were far from the net at chunk start are examined
        # one at a time, against the points accepted since.
        pos = 0
        for i in np.flatnonzero(~near):
            run = int(i) - pos
            if streak + run >= streak_factor * max(m, 1):
                return net[:m].copy()
            streak += run
            pos = int(i) + 1
            c = cand[i]
            if m > m0 and np.max(net[m0:m] @ c) >= cos_eps:
                streak += 1
                if streak >= streak_factor * max(m, 1):
                    return net[:m].copy()
                continue
            if m == net.shape[0]:
                if m >= cap:
                    raise NetConstructionError("greedy net exceeded the cardinality bound")
                net = np.concatenate([net, np.empty_like(net)])
            net[m] = c
            m += 1
            streak = 0
        streak += chunk - pos
        if streak >= streak_factor * max(m, 1):
            return net[:m].copy()


@lru_cache(maxsize=32)
def cached_net(d, eps, seed):
    """Net for ``(d, eps)`` built from the stream keyed by ``seed``; memoised per process."""
    from .rng import stream

    return build_geodesic_net(d, eps, stream(seed, 0x6E6574))


def min_separation(points):
    """Smallest pairwise geodesic distance of a point set (quadratic; test helper)."""
    g = np.clip(points @ points.T, -1.0, 1.0)
    np.fill_diagonal(g, -1.0)
    return float(np.arccos(g.max()))
