"""The pairwise difference operator E, with rows e_i - e_j.

For a prior covariance C over object qualities, the covariance of all pair
differences is ``E C E^T``. This module never forms that M x M product;
only :mod:`cjdesign.exact_design` materialises it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import sparse

from . import kernels
from .core import index_to_pair, n_pairs


@dataclass(frozen=True)
class DiffOperator:
    """Sparse M x N operator, row r = e_{i(r)} - e_{j(r)} in canonical pair order.

    Storage is implicit: entries follow from the pair index, so row and
    column access cost nothing extra to keep.
    """

    n_objects: int

    def __post_init__(self) -> None:
        if self.n_objects < 2:
            raise ValueError("need at least two objects")

    @property
    def n_pairs(self) -> int:
        return n_pairs(self.n_objects)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_pairs, self.n_objects

    @property
    def nnz(self) -> int:
        return self.n_objects * (self.n_objects - 1)

    def matvec(self, v: npt.ArrayLike, backend: str | None = None) -> npt.NDArray[np.float64]:
        """E @ v for a length-N vector."""
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape != (self.n_objects,):
            raise ValueError(f"expected length {self.n_objects}, got shape {v.shape}")
        return kernels.resolve(backend).diff_matvec(v, self.n_objects)

    def rmatvec(self, x: npt.ArrayLike, backend: str | None = None) -> npt.NDArray[np.float64]:
        """E^T @ x for a length-M vector."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.n_pairs,):
            raise ValueError(f"expected length {self.n_pairs}, got shape {x.shape}")
        return kernels.resolve(backend).diff_rmatvec(x, self.n_objects)

    def to_sparse(self) -> sparse.csr_matrix:
        """Explicit CSR copy (2 stored entries per row)."""
        i, j = np.triu_indices(self.n_objects, 1)
        m = i.shape[0]
        rows = np.repeat(np.arange(m), 2)
        cols = np.column_stack([i, j]).ravel()
        vals = np.tile([1.0, -1.0], m)
        return sparse.csr_matrix((vals, (rows, cols)), shape=self.shape)

    def toarray(self) -> npt.NDArray[np.float64]:
        return self.to_sparse().toarray()


def build_E(n: int) -> DiffOperator:
    return DiffOperator(n)


def column(E: DiffOperator, k: int, backend: str | None = None) -> npt.NDArray[np.float64]:
    """Dense copy of column k (1-based) of E: +1 where k is the first member, -1 where second."""
    if not 1 <= k <= E.n_objects:
        raise ValueError(f"column index must lie in 1..{E.n_objects}, got {k}")
    return kernels.resolve(backend).diff_column(k - 1, E.n_objects)


def delta_entry(C: npt.ArrayLike, r: int, s: int) -> float:
    """Cov(lambda_i - lambda_j, lambda_k - lambda_l) for pairs r = (i, j), s = (k, l)."""
    C = np.asarray(C)
    n = C.shape[0]
    i, j = index_to_pair(r, n)
    k, l = index_to_pair(s, n)
    i, j, k, l = i - 1, j - 1, k - 1, l - 1
    return float(C[i, k] - C[i, l] - C[j, k] + C[j, l])
