# cython: language_level=3
"""Compiled inner loops for the pair-difference operator and the RBD sweep.

Every function here mirrors one in :mod:`cjdesign._pykernels` with the same
signature and semantics. Indices are 0-based; pairs run in canonical order
(0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1).
"""

import numpy as np

from scipy.linalg.cython_blas cimport daxpy, ddot


def diff_matvec(const double[::1] v, Py_ssize_t n):
    """Return E @ v, i.e. v[i] - v[j] for every pair."""
    cdef Py_ssize_t m = n * (n - 1) // 2
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, r = 0
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                o[r] = v[i] - v[j]
                r += 1
    return out


def diff_rmatvec(const double[::1] x, Py_ssize_t n):
    """Return E.T @ x (a length-n vector)."""
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, r = 0
    cdef double acc, xr
    with nogil:
        for i in range(n - 1):
            acc = 0.0
            for j in range(i + 1, n):
                xr = x[r]
                acc += xr
                o[j] -= xr
                r += 1
            o[i] += acc
    return out


def diff_column(Py_ssize_t k, Py_ssize_t n):
    """Dense column k of E."""
    cdef Py_ssize_t m = n * (n - 1) // 2
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, base
    with nogil:
        # rows (i, k) for i < k carry -1
        for i in range(k):
            base = i * (2 * n - i - 1) // 2
            o[base + k - i - 1] = -1.0
        # rows (k, j) for j > k carry +1 and are contiguous
        base = k * (2 * n - k - 1) // 2
        for i in range(n - 1 - k):
            o[base + i] = 1.0
    return out


def mgs_sweep(double[:, ::1] Q, Py_ssize_t d, double[::1] v, double[::1] h):
    """One modified Gram-Schmidt pass of ``v`` against rows ``Q[:d]``.

    ``v`` is updated in place and each projection coefficient is added to
    ``h[k]``.
    """
    cdef int m = <int>v.shape[0]
    cdef int inc = 1
    cdef double c
    cdef Py_ssize_t k
    if d == 0:
        return
    with nogil:
        for k in range(d):
            c = ddot(&m, &Q[k, 0], &inc, &v[0], &inc)
            h[k] += c
            c = -c
            daxpy(&m, &c, &Q[k, 0], &inc, &v[0], &inc)


def weighted_row_sumsq(const double[:, :] Z, const double[::1] w):
    """Return ``sum_c Z[r, c]**2 * w[c]`` for every row r."""
    cdef Py_ssize_t m = Z.shape[0], d = Z.shape[1]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t r, c
    cdef double acc, z
    with nogil:
        for r in range(m):
            acc = 0.0
            for c in range(d):
                z = Z[r, c]
                acc += z * z * w[c]
            o[r] = acc
    return out


def pair_variances(const double[:, :] C):
    """Return C[i,i] + C[j,j] - 2 C[i,j] for every pair."""
    cdef Py_ssize_t n = C.shape[0]
    cdef Py_ssize_t m = n * (n - 1) // 2
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, r = 0
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                o[r] = C[i, i] + C[j, j] - C[i, j] - C[j, i]
                r += 1
    return out


def fill_delta(const double[:, :] C):
    """Dense pairs-of-pairs covariance: C[i,k] - C[i,l] - C[j,k] + C[j,l].

    Only the upper triangle is evaluated; the lower one is mirrored so the
    result is exactly symmetric.
    """
    cdef Py_ssize_t n = C.shape[0]
    cdef Py_ssize_t m = n * (n - 1) // 2
    out = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef Py_ssize_t i, j, k, l, r = 0, s
    cdef double a, b
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                s = 0
                for k in range(n - 1):
                    a = C[i, k] - C[j, k]
                    for l in range(k + 1, n):
                        if s < r:
                            D[r, s] = D[s, r]
                        else:
                            b = C[i, l] - C[j, l]
                            D[r, s] = a - b
                        s += 1
                r += 1
    return out
