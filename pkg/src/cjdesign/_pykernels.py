"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same 0-based canonical pair order. These are used whenever
the extension is not built, and serve as the reference in backend tests.
"""

from functools import lru_cache

import numpy as np

# Rows per block when a kernel would otherwise allocate an (M, d) temporary.
_CHUNK = 8192


@lru_cache(maxsize=8)
def _pairs(n):
    i, j = np.triu_indices(n, 1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def diff_matvec(v, n):
    i, j = _pairs(n)
    v = np.asarray(v, dtype=np.float64)
    return v[i] - v[j]


def diff_rmatvec(x, n):
    i, j = _pairs(n)
    x = np.asarray(x, dtype=np.float64)
    return np.bincount(i, weights=x, minlength=n) - np.bincount(j, weights=x, minlength=n)


def diff_column(k, n):
    i, j = _pairs(n)
    out = np.zeros(i.shape[0])
    out[i == k] = 1.0
    out[j == k] = -1.0
    return out


def mgs_sweep(Q, d, v, h):
    for k in range(d):
        q = Q[k]
        c = q @ v
        h[k] += c
        v -= c * q


def weighted_row_sumsq(Z, w):
    Z = np.asarray(Z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    out = np.empty(Z.shape[0])
    for start in range(0, Z.shape[0], _CHUNK):
        block = Z[start:start + _CHUNK]
        out[start:start + _CHUNK] = (block * block) @ w
    return out


def pair_variances(C):
    C = np.asarray(C, dtype=np.float64)
    i, j = _pairs(C.shape[0])
    return C[i, i] + C[j, j] - C[i, j] - C[j, i]


def fill_delta(C):
    C = np.asarray(C, dtype=np.float64)
    i, j = _pairs(C.shape[0])
    # rows of C restricted to pair members, differenced: B[r, :] = C[i_r] - C[j_r]
    B = C[i] - C[j]
    D = B[:, i] - B[:, j]
    # mirror the upper triangle so D is exactly symmetric
    for start in range(0, D.shape[0], 512):
        stop = start + 512
        D[start:stop, :start] = D[:start, start:stop].T
        blk = D[start:stop, start:stop]
        lo = np.tril_indices(blk.shape[0], -1)
        blk[lo] = blk.T[lo]
    return D
