"""Pure-numpy versions of the compiled kernels in ``_core.pyx``.

Same enumeration order, pivot rule and tie-breaking, so results agree with the
compiled path up to floating-point summation order.
"""

from itertools import combinations

import numpy as np

_CHUNK = 1 << 14


def _batched_lu(a, pivot_tol):
    """Partial-pivot LU of a stack ``(K, d, d)`` in place.

    Returns ``(lu, perm, ok)``: ``perm`` is the row permutation applied to
    each system and ``ok`` flags systems whose pivots all exceed ``pivot_tol``.
    """
    K, d, _ = a.shape
    perm = np.tile(np.arange(d), (K, 1))
    ok = np.ones(K, dtype=bool)
    rows = np.arange(K)
    for k in range(d):
        p = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        ok &= np.abs(a[rows, p, k]) > pivot_tol
        swap_a = a[rows, p].copy()
        a[rows, p] = a[:, k]
        a[:, k] = swap_a
        swap_p = perm[rows, p].copy()
        perm[rows, p] = perm[:, k]
        perm[:, k] = swap_p
        piv = np.where(ok, a[:, k, k], 1.0)
        f = a[:, k + 1:, k] / piv[:, None]
        a[:, k + 1:, k] = f
        a[:, k + 1:, k + 1:] -= f[:, :, None] * a[:, k, None, k + 1:]
    return a, perm, ok


def _lu_solve(lu, perm, b):
    """Solve with stacked LU factors for right-hand sides ``b (K, d, S)``."""
    K, d, _ = lu.shape
    x = np.take_along_axis(b, perm[:, :, None], axis=1).copy()
    for i in range(1, d):
        x[:, i] -= np.einsum("kj,kjs->ks", lu[:, i, :i], x[:, :i])
    for i in range(d - 1, -1, -1):
        x[:, i] -= np.einsum("kj,kjs->ks", lu[:, i, i + 1:], x[:, i + 1:])
        x[:, i] /= lu[:, i, i, None]
    return x


def vertex_max_norm(phi, eps, delta, pivot_tol=1e-12, slack=1e-9):
    phi = np.ascontiguousarray(phi, dtype=float)
    eps = np.ascontiguousarray(eps, dtype=float)
    N, d = phi.shape
    if N < d:
        return 0.0, np.zeros(d), False
    nsign = 1 << d
    # signs[j, s] = +1 for the upper facet, -1 when bit j of s is set
    signs = np.where((np.arange(nsign)[None, :] >> np.arange(d)[:, None]) & 1, -1.0, 1.0)
    best = -1.0
    best_u = np.zeros(d)
    it = combinations(range(N), d)
    while True:
        block = np.fromiter((i for c in _take(it, _CHUNK) for i in c), dtype=np.intp)
        if block.size == 0:
            break
        idx = block.reshape(-1, d)
        lu, perm, ok = _batched_lu(phi[idx].copy(), pivot_tol)
        idx, lu, perm = idx[ok], lu[ok], perm[ok]
        if len(idx) == 0:
            continue
        rhs = eps[idx][:, :, None] + delta * signs[None, :, :]
        u = _lu_solve(lu, perm, rhs)  # (K, d, S)
        u = np.swapaxes(u, 1, 2).reshape(-1, d)  # subset-major, sign-minor
        nrm = np.einsum("ij,ij->i", u, u)
        cand = np.flatnonzero(nrm > best)
        if cand.size == 0:
            continue
        res = np.abs(u[cand] @ phi.T - eps)
        feas = cand[np.all(res <= delta + slack, axis=1)]
        if feas.size == 0:
            continue
        j = feas[np.argmax(nrm[feas])]
        if nrm[j] > best:
            best = float(nrm[j])
            best_u = u[j].copy()
    if best < 0.0:
        return 0.0, np.zeros(d), False
    return float(np.sqrt(best)), best_u, True


def _take(it, n):
    for _, c in zip(range(n), it):
        yield c


def _soft(r, delta):
    return np.where(r > delta, r - delta, np.where(r < -delta, r + delta, 0.0))


def pocs(phi, q, delta, x0, tol, max_passes):
    x, p, m = pocs_batch(np.asarray(phi)[None], np.asarray(q)[None], delta,
                         np.asarray(x0, dtype=float)[None], tol, max_passes)
    return x[0], int(p[0]), float(m[0])


def pocs_batch(phi, q, delta, x0, tol, max_passes):
    phi = np.asarray(phi, dtype=float)
    q = np.asarray(q, dtype=float)
    x = np.array(x0, dtype=float, copy=True)
    T, N, _ = phi.shape
    passes = np.zeros(T, dtype=np.int64)
    res = np.zeros(T)
    active = np.arange(T)
    p = 0
    while active.size and p < max_passes:
        xa = x[active]
        ph = phi[active]
        qa = q[active]
        for n in range(N):
            r = qa[:, n] - np.einsum("tj,tj->t", ph[:, n], xa)
            xa += _soft(r, delta)[:, None] * ph[:, n]
        p += 1
        x[active] = xa
        m = np.abs(np.einsum("tnj,tj->tn", ph, xa) - qa).max(axis=1)
        passes[active] = p
        res[active] = m
        active = active[m > delta + tol]
    return x, passes, res
