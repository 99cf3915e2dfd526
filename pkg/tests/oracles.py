"""Independent reference computations used by the tests.

Nothing here calls into the package's geometry code; each oracle is a
separate derivation of the same quantity.
"""

import math
from itertools import combinations

import numpy as np


def clip_polygon(poly, a, b):
    """Sutherland-Hodgman clip of a convex polygon by the half-plane <a, u> <= b."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = a @ p - b, a @ q - b
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def polygon_worst_case_d2(phi, eps, delta, box=1e6):
    """W_N for d = 2: clip a huge square by all 2N half-planes, then sort the
    surviving vertices by angle and return the largest norm."""
    poly = [np.array(v, dtype=float) for v in ((-box, -box), (box, -box), (box, box), (-box, box))]
    for f, e in zip(phi, eps):
        poly = clip_polygon(poly, f, e + delta)
        poly = clip_polygon(poly, -f, delta - e)
    verts = sorted(poly, key=lambda v: math.atan2(v[1], v[0]))
    return max(float(np.hypot(*v)) for v in verts)


def brute_vertices(phi, eps, delta, slack=1e-9):
    """All vertices of the slab system by solving every d-subset with numpy.linalg.solve."""
    N, d = phi.shape
    A = np.vstack([phi, -phi])
    b = np.concatenate([eps + delta, delta - eps])
    out = []
    for rows in combinations(range(2 * N), d):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        u = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ u <= b + slack):
            out.append(u)
    return np.array(out)


def stevens_noncoverage(N, theta):
    """Exact probability that N uniform open arcs of length 2 theta fail to cover the circle."""
    a = theta / math.pi
    total = 0.0
    for k in range(1, N + 1):
        term = max(1.0 - k * a, 0.0) ** (N - 1)
        total += (-1) ** (k + 1) * math.comb(N, k) * term
    return total


def circle_uncovered_grid(arcs, m=200000):
    """Grid check of open-arc coverage; only reliable away from touching configurations."""
    t = np.linspace(0, 2 * math.pi, m, endpoint=False)
    covered = np.zeros(m, dtype=bool)
    for c, w in arcs:
        diff = np.abs((t - c + math.pi) % (2 * math.pi) - math.pi)
        covered |= diff < w
    return not covered.all()
