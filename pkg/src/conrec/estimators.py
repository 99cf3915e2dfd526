"""Reconstruction methods and the worst-case error of the error polytope.

* ``rg_estimate``: one online pass of soft-thresholded updates.
* ``consistent_estimate``: the same update applied cyclically until every
  measurement is matched to within delta (projections onto convex slabs).
* ``linear_estimate``: reconstruction with the canonical dual frame.
* ``worst_case_error_exact`` / ``worst_case_error_radial_net``: W_N, the
  largest norm in the error polytope, exactly by vertex enumeration or from
  below by probing radial extents along a net.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from . import kernels
from .errors import CapacityError, DimensionMismatchError, RankDeficiencyError, UnboundedPolytopeError
from .measurement import radial_extent

DEFAULT_TOL = 1e-9
DEFAULT_MAX_PASSES = 1_000_000
ENUMERATION_CAP = 5_000_000
MAX_ENUM_DIM = 8
PIVOT_TOL = 1e-12
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class EstimateReport:
    estimate: np.ndarray
    consistent: bool
    passes_used: int
    max_abs_residual: float


@dataclass(frozen=True)
class DualFrame:
    duals: np.ndarray  # (N, d), row n is f_n
    source_directions: np.ndarray

    def reconstruct(self, coefficients):
        return np.asarray(coefficients, dtype=float) @ self.duals


@dataclass(frozen=True)
class WorstCaseResult:
    value: float
    witness: np.ndarray
    method: str  # "vertex-exact" or "radial-net-lower"


def soft_threshold(t, delta):
    if t > delta:
        return t - delta
    if t < -delta:
        return t + delta
    return 0.0


def rg_step(current, m, delta):
    """Move ``current`` onto the slab ``|<u, phi> - q| <= delta`` of measurement ``m``.

    For unit ``phi`` this is the Euclidean projection onto the slab.
    """
    current = np.asarray(current, dtype=float)
    r = m.value - float(np.dot(current, m.direction))
    return current + soft_threshold(r, delta) * np.asarray(m.direction)


def _report(instance, x, passes, tol):
    res = float(np.max(np.abs(instance.phi @ x - instance.values)))
    return EstimateReport(x, res <= instance.delta + tol, int(passes), res)


def rg_estimate(instance, x0=None):
    """Single in-order pass of soft-threshold updates, started at ``x0`` (default 0)."""
    x0 = np.zeros(instance.d) if x0 is None else np.asarray(x0, dtype=float)
    x = x0.copy()
    for m in instance.measurements:
        x = rg_step(x, m, instance.delta)
    return _report(instance, x, 1, DEFAULT_TOL)


def consistent_estimate(instance, x0=None, tol=DEFAULT_TOL, max_passes=DEFAULT_MAX_PASSES,
                        history=None):
    """A point of the consistent set, found by cyclic slab projections.

    ``x0`` defaults to the linear canonical-dual estimate (or 0 if the
    directions do not span).  When ``history`` is a list, the iterate after
    every pass is appended to it; that path runs in Python.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if x0 is None:
        x0 = _warm_start(instance)
    x0 = np.ascontiguousarray(x0, dtype=float)
    if x0.shape != (instance.d,):
        raise DimensionMismatchError(f"x0 has shape {x0.shape}, expected ({instance.d},)")
    if history is None:
        x, passes, _ = kernels.pocs(np.ascontiguousarray(instance.phi), np.ascontiguousarray(instance.values),
                                    instance.delta, x0, tol, max_passes)
        return _report(instance, np.asarray(x), passes, tol)
    x = x0.copy()
    ms = instance.measurements
    for p in range(1, max_passes + 1):
        for m in ms:
            x = rg_step(x, m, instance.delta)
        history.append(x.copy())
        rep = _report(instance, x, p, tol)
        if rep.consistent:
            return rep
    return rep


def _warm_start(instance):
    try:
        return linear_estimate(instance, canonical_dual(instance.phi))
    except RankDeficiencyError:
        return np.zeros(instance.d)


def consistent_estimate_batch(phi, values, delta, x0, tol=DEFAULT_TOL, max_passes=DEFAULT_MAX_PASSES):
    """Stacked version of ``consistent_estimate`` for ``phi (T, N, d)``; returns ``(X, passes, max_res)``."""
    return kernels.pocs_batch(np.ascontiguousarray(phi, dtype=float), np.ascontiguousarray(values, dtype=float),
                              float(delta), np.ascontiguousarray(x0, dtype=float), tol, max_passes)


def canonical_dual(directions):
    """Canonical dual frame ``f_n = S^{-1} phi_n`` with ``S = sum phi_n phi_n^T``."""
    phi = np.atleast_2d(np.asarray(directions, dtype=float))
    N, d = phi.shape
    S = phi.T @ phi
    rank = np.linalg.matrix_rank(phi)
    if rank < d:
        raise RankDeficiencyError(f"directions span a {rank}-dimensional subspace of R^{d}; "
                                  f"the frame operator is singular")
    try:
        cf = scipy.linalg.cho_factor(S)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"frame operator is not positive definite: {exc}") from None
    duals = scipy.linalg.cho_solve(cf, phi.T).T
    return DualFrame(duals, phi)


def linear_estimate(instance, dual):
    if dual.duals.shape != instance.phi.shape:
        raise DimensionMismatchError(f"dual frame has shape {dual.duals.shape}, "
                                     f"measurements have {instance.phi.shape}")
    return instance.values @ dual.duals


def linear_estimate_batch(phi, values):
    """Canonical-dual reconstruction for stacked instances ``phi (T, N, d)``."""
    S = np.einsum("tni,tnj->tij", phi, phi)
    b = np.einsum("tni,tn->ti", phi, values)
    return np.linalg.solve(S, b[..., None])[..., 0]


def worst_case_error_exact(slabs, cap=ENUMERATION_CAP, max_dim=MAX_ENUM_DIM):
    """W_N by enumerating every vertex of the slab system.

    Raises ``UnboundedPolytopeError`` when the directions do not span R^d and
    ``CapacityError`` when the number of d-subsets of facets exceeds ``cap``.
    """
    N, d = slabs.N, slabs.d
    if d > max_dim:
        raise CapacityError(f"d={d} above the vertex-enumeration limit {max_dim}; "
                            f"use worst_case_error_radial_net")
    work = math.comb(2 * N, d)
    if work > cap:
        raise CapacityError(f"C(2N, d) = {work} facet subsets exceeds the cap {cap}; "
                            f"use worst_case_error_radial_net")
    if N < d or np.linalg.matrix_rank(slabs.directions) < d:
        raise UnboundedPolytopeError(_ray_message(slabs))
    value, witness, found = kernels.vertex_max_norm(
        np.ascontiguousarray(slabs.directions, dtype=float), np.ascontiguousarray(slabs.offsets, dtype=float),
        float(slabs.delta), PIVOT_TOL, FEASIBILITY_SLACK)
    if not found:
        raise UnboundedPolytopeError(_ray_message(slabs))
    return WorstCaseResult(float(value), np.asarray(witness), "vertex-exact")


def _ray_message(slabs):
    # Any null vector of the direction matrix is a ray of the polytope.
    _, s, vt = np.linalg.svd(slabs.directions)
    ray = vt[-1]
    r = radial_extent(slabs, ray)
    return f"error polytope is unbounded: radial extent along {np.array2string(ray, precision=6)} is {r}"


def worst_case_error_radial_net(slabs, net):
    """Lower bound on W_N: the largest radial extent over the net directions."""
    pts = net.points if hasattr(net, "points") else np.asarray(net, dtype=float)
    if pts.shape[1] != slabs.d:
        raise DimensionMismatchError(f"net dimension {pts.shape[1]} != polytope dimension {slabs.d}")
    a = pts @ slabs.directions.T  # (M, N)
    num = np.where(a >= 0.0, slabs.offsets + slabs.delta, slabs.delta - slabs.offsets)
    with np.errstate(divide="ignore"):
        r = np.where(a == 0.0, np.inf, num / np.abs(a)).min(axis=1)
    k = int(np.argmax(r))
    if not np.isfinite(r[k]):
        raise UnboundedPolytopeError(f"radial extent is infinite along net point {k}")
    return WorstCaseResult(float(r[k]), r[k] * pts[k], "radial-net-lower")
