# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: exact polytope vertex enumeration and cyclic slab projections.

Semantics match ``conrec._kernels_py`` exactly; only the speed differs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef enum:
    MAXD = 16


cdef inline int _lu(double* a, int* piv, int d, double pivot_tol) noexcept nogil:
    """In-place LU with partial pivoting of a row-major d x d matrix. Returns 0 if singular."""
    cdef int k, i, j, p
    cdef double best, t, f
    for k in range(d):
        p = k
        best = fabs(a[k * d + k])
        for i in range(k + 1, d):
            t = fabs(a[i * d + k])
            if t > best:
                best = t
                p = i
        if best <= pivot_tol:
            return 0
        piv[k] = p
        if p != k:
            for j in range(d):
                t = a[k * d + j]
                a[k * d + j] = a[p * d + j]
                a[p * d + j] = t
        for i in range(k + 1, d):
            f = a[i * d + k] / a[k * d + k]
            a[i * d + k] = f
            for j in range(k + 1, d):
                a[i * d + j] -= f * a[k * d + j]
    return 1


cdef inline void _lu_solve(const double* a, const int* piv, double* b, int d) noexcept nogil:
    cdef int k, i, j
    cdef double t
    for k in range(d):
        if piv[k] != k:
            t = b[k]
            b[k] = b[piv[k]]
            b[piv[k]] = t
    for i in range(1, d):
        for j in range(i):
            b[i] -= a[i * d + j] * b[j]
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            b[i] -= a[i * d + j] * b[j]
        b[i] /= a[i * d + i]


def vertex_max_norm(const double[:, ::1] phi, const double[::1] eps, double delta,
                    double pivot_tol=1e-12, double slack=1e-9):
    """Max Euclidean norm over the vertices of ``{u : |phi u - eps| <= delta}``.

    Enumerates d-subsets of slabs in lexicographic order and, for each, the
    2^d sign patterns (bit j set selects the lower facet of slab j).  Returns
    ``(value, witness, found)``; ties keep the first vertex in that order.
    """
    cdef int N = phi.shape[0]
    cdef int d = phi.shape[1]
    if d > MAXD:
        raise ValueError("dimension above compiled limit")
    cdef int idx[MAXD]
    cdef int piv[MAXD]
    cdef double a[MAXD * MAXD]
    cdef double b[MAXD]
    cdef double best_u[MAXD]
    cdef double best = -1.0
    cdef double nrm, r, lim = delta + slack
    cdef int i, j, k, n, s, nsign = 1 << d, ok
    if N < d:
        return 0.0, np.zeros(d), False
    with nogil:
        for i in range(d):
            idx[i] = i
        while True:
            for i in range(d):
                for j in range(d):
                    a[i * d + j] = phi[idx[i], j]
            if _lu(a, piv, d, pivot_tol):
                for s in range(nsign):
                    for i in range(d):
                        if (s >> i) & 1:
                            b[i] = eps[idx[i]] - delta
                        else:
                            b[i] = eps[idx[i]] + delta
                    _lu_solve(a, piv, b, d)
                    nrm = 0.0
                    for i in range(d):
                        nrm += b[i] * b[i]
                    if nrm <= best:
                        continue
                    ok = 1
                    for n in range(N):
                        r = -eps[n]
                        for j in range(d):
                            r += phi[n, j] * b[j]
                        if fabs(r) > lim:
                            ok = 0
                            break
                    if ok:
                        best = nrm
                        for i in range(d):
                            best_u[i] = b[i]
            # next combination
            k = d - 1
            while k >= 0 and idx[k] == N - d + k:
                k -= 1
            if k < 0:
                break
            idx[k] += 1
            for i in range(k + 1, d):
                idx[i] = idx[i - 1] + 1
    if best < 0.0:
        return 0.0, np.zeros(d), False
    w = np.empty(d)
    for i in range(d):
        w[i] = best_u[i]
    return sqrt(best), w, True


cdef inline void _sweep(const double[:, ::1] phi, const double[::1] q, double delta,
                        double* x, int N, int d) noexcept nogil:
    cdef int n, j
    cdef double r, t
    for n in range(N):
        r = q[n]
        for j in range(d):
            r -= phi[n, j] * x[j]
        if r > delta:
            t = r - delta
        elif r < -delta:
            t = r + delta
        else:
            continue
        for j in range(d):
            x[j] += t * phi[n, j]


cdef inline double _max_residual(const double[:, ::1] phi, const double[::1] q,
                                 const double* x, int N, int d) noexcept nogil:
    cdef int n, j
    cdef double r, m = 0.0
    for n in range(N):
        r = -q[n]
        for j in range(d):
            r += phi[n, j] * x[j]
        r = fabs(r)
        if r > m:
            m = r
    return m


def pocs(const double[:, ::1] phi, const double[::1] q, double delta, const double[::1] x0,
         double tol, long max_passes):
    """Cyclic soft-threshold projections until every residual is within delta + tol.

    Returns ``(x, passes_used, max_abs_residual)``.
    """
    cdef int N = phi.shape[0]
    cdef int d = phi.shape[1]
    out = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = out
    cdef long p = 0
    cdef double m = 0.0
    with nogil:
        while p < max_passes:
            _sweep(phi, q, delta, &x[0], N, d)
            p += 1
            m = _max_residual(phi, q, &x[0], N, d)
            if m <= delta + tol:
                break
    return out, p, m


def pocs_batch(const double[:, :, ::1] phi, const double[:, ::1] q, double delta, const double[:, ::1] x0,
               double tol, long max_passes):
    """``pocs`` applied independently to each of T stacked instances."""
    cdef int T = phi.shape[0]
    cdef int N = phi.shape[1]
    cdef int d = phi.shape[2]
    out = np.array(x0, dtype=np.float64, copy=True)
    passes_arr = np.zeros(T, dtype=np.int64)
    res_arr = np.zeros(T, dtype=np.float64)
    cdef double[:, ::1] x = out
    cdef cnp.int64_t[::1] passes = passes_arr
    cdef double[::1] res = res_arr
    cdef int t
    cdef long p
    cdef double m
    with nogil:
        for t in range(T):
            p = 0
            m = 0.0
            while p < max_passes:
                _sweep(phi[t], q[t], delta, &x[t, 0], N, d)
                p += 1
                m = _max_residual(phi[t], q[t], &x[t, 0], N, d)
                if m <= delta + tol:
                    break
            passes[t] = p
            res[t] = m
    return out, passes_arr, res_arr
