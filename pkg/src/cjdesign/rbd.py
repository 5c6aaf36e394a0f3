"""Greedy reduced basis decomposition of the difference operator and the
projected eigenproblem it induces.

``rbd`` builds an orthonormal basis Y (M x d) and coefficients T = Y^T E
(d x N) so that E ~= Y T, picking at every step the column of E that the
current basis represents worst. Because Y T C T^T Y^T approximates
E C E^T, the eigenpairs of the small d x d matrix T C T^T, lifted by Y,
approximate the leading eigenpairs of the pairs-of-pairs covariance without
ever forming it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import linalg

from . import kernels
from .exact_design import EigenpairSet, NumericalError
from .sparse_diff import DiffOperator

#: Below this tolerance the greedy loop is dominated by roundoff.
PRECISION_FLOOR = 1e-12
# Second MGS pass when the orthogonalised norm drops below this fraction.
_REORTH_RATIO = 1e-3
# Incremental squared residuals below this fraction of ||E(:,j)||^2 are
# recomputed directly; the subtraction has cancelled too many digits.
_RECOMPUTE_RATIO = 1e-4
_COLUMN_CHUNK = 32


class ToleranceWarning(UserWarning):
    """Requested RBD tolerance is below what double precision supports reliably."""


@dataclass(frozen=True)
class RbdConfig:
    tolerance: float = 1e-6
    d_max: int | None = None
    init: Literal["first", "random"] = "first"
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.d_max is not None and self.d_max < 1:
            raise ValueError(f"d_max must be at least 1, got {self.d_max}")
        if self.init not in ("first", "random"):
            raise ValueError(f"init must be 'first' or 'random', got {self.init!r}")

    def resolved_d_max(self, n: int) -> int:
        if self.d_max is None:
            return n - 1
        if self.d_max > n - 1:
            raise ValueError(f"d_max={self.d_max} exceeds rank(E) = N - 1 = {n - 1}")
        return self.d_max


@dataclass(frozen=True)
class ReducedBasis:
    """Output of :func:`rbd`.

    ``rows`` stores the basis vectors as rows (Y transposed) so that each is
    contiguous; ``basis`` gives the M x d view. ``selected_columns`` are
    1-based column indices of E in the order they were chosen.
    """

    n_objects: int
    rows: npt.NDArray[np.float64]
    coefficients: npt.NDArray[np.float64]
    final_residual: float
    selected_columns: tuple[int, ...]
    stop_reason: str

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    @property
    def basis(self) -> npt.NDArray[np.float64]:
        return self.rows.T


def _direct_residuals(n: int, rows: np.ndarray, coeffs: np.ndarray, cols: np.ndarray,
                      kern) -> np.ndarray:
    """||E(:,j) - Y T(:,j)|| for 0-based ``cols``, computed from scratch."""
    out = np.empty(cols.shape[0])
    for start in range(0, cols.shape[0], _COLUMN_CHUNK):
        chunk = cols[start:start + _COLUMN_CHUNK]
        block = np.column_stack([kern.diff_column(int(k), n) for k in chunk])
        block -= rows.T @ coeffs[:, chunk]
        out[start:start + _COLUMN_CHUNK] = np.linalg.norm(block, axis=0)
    return out


def residual_norms(E: DiffOperator, basis: ReducedBasis, backend: str | None = None) -> np.ndarray:
    """Column residuals ``||E(:,j) - Y T(:,j)||`` for all j, recomputed from scratch."""
    kern = kernels.resolve(backend)
    return _direct_residuals(E.n_objects, basis.rows, basis.coefficients,
                             np.arange(E.n_objects), kern)


def rbd(E: DiffOperator, cfg: RbdConfig = RbdConfig(), backend: str | None = None) -> ReducedBasis:
    """Greedy reduced basis decomposition ``E ~= Y T``.

    Each step orthonormalises the currently worst-approximated column against
    the basis by modified Gram-Schmidt (with one repeat pass if the norm
    collapses), stops if what is left is below ``cfg.tolerance``, and
    otherwise appends it, sets the new row of T to ``xi^T E`` and updates the
    per-column residuals. The loop ends once the largest residual is at most
    the tolerance or the basis reaches ``d_max`` vectors. Ties in the argmax
    go to the smallest column index.
    """
    n, m = E.n_objects, E.n_pairs
    d_max = cfg.resolved_d_max(n)
    tol = cfg.tolerance
    if tol < PRECISION_FLOOR:
        warnings.warn(
            f"RBD tolerance {tol:g} is below {PRECISION_FLOOR:g}; residuals at this level are "
            "dominated by floating-point roundoff and the greedy stopping rule may not trigger",
            ToleranceWarning,
            stacklevel=2,
        )
    kern = kernels.resolve(backend)

    Q = np.zeros((d_max, m))
    T = np.zeros((d_max, n))
    col_norm2 = float(n - 1)  # every column of E has n - 1 entries of +-1
    res2 = np.full(n, col_norm2)
    chosen = np.zeros(n, dtype=bool)
    order: list[int] = []

    if cfg.init == "random":
        current = int(np.random.default_rng(cfg.seed).integers(n))
    else:
        current = 0

    d = 0
    e_cur = math.inf
    stop = "d_max"
    while d < d_max and e_cur > tol:
        v = kern.diff_column(current, n)
        h = np.zeros(d_max)
        kern.mgs_sweep(Q, d, v, h)
        nv = float(np.linalg.norm(v))
        if d > 0 and nv < _REORTH_RATIO * math.sqrt(col_norm2):
            kern.mgs_sweep(Q, d, v, h)
            nv = float(np.linalg.norm(v))
        if nv < tol:
            e_cur = nv
            stop = "breakdown"
            break

        v /= nv
        Q[d] = v
        T[d] = kern.diff_rmatvec(v, n)
        chosen[current] = True
        order.append(current)
        d += 1

        res2 -= T[d - 1] ** 2
        res2[chosen] = 0.0
        suspect = np.flatnonzero((res2 < _RECOMPUTE_RATIO * col_norm2) & ~chosen)
        if suspect.size:
            res2[suspect] = _direct_residuals(n, Q[:d], T[:d], suspect, kern) ** 2
        res = np.sqrt(np.maximum(res2, 0.0))
        current = int(np.argmax(res))
        e_cur = float(res[current])
        if e_cur <= tol:
            stop = "tolerance"

    if d == 0:
        raise NumericalError("RBD produced an empty basis")
    rows = Q[:d] if d == d_max else Q[:d].copy()
    return ReducedBasis(
        n_objects=n,
        rows=rows,
        coefficients=T[:d].copy(),
        final_residual=e_cur,
        selected_columns=tuple(k + 1 for k in order),
        stop_reason=stop,
    )


def project_C(basis: ReducedBasis, C: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Projected covariance ``T C T^T`` (d x d)."""
    C = np.asarray(C, dtype=np.float64)
    T = basis.coefficients
    if C.shape != (T.shape[1], T.shape[1]):
        raise ValueError(f"covariance shape {C.shape} does not match basis over {T.shape[1]} objects")
    Ct = T @ C @ T.T
    return 0.5 * (Ct + Ct.T)


def approx_eigenpairs(basis: ReducedBasis, Ct: npt.ArrayLike) -> EigenpairSet:
    """Eigenpairs of ``Y C~ Y^T``: values of ``C~`` and vectors ``Y V``."""
    Ct = np.asarray(Ct, dtype=np.float64)
    if Ct.shape != (basis.dim, basis.dim):
        raise ValueError(f"projected matrix must be {basis.dim}x{basis.dim}, got {Ct.shape}")
    try:
        w, V = linalg.eigh(Ct)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition of projected matrix failed: {exc}") from exc
    w = w[::-1].copy()
    V = np.ascontiguousarray(V[:, ::-1])
    negative = w < 0
    w[negative] = 0.0
    return EigenpairSet(w, basis.basis @ V, int(negative.sum()))
