"""Prior covariance structures used for simulated and applied designs.

All random generators take a ``seed`` and use ``numpy.random.default_rng``
(PCG64), so a given seed reproduces the same matrix.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
from scipy import linalg

Matrix = npt.NDArray[np.float64]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_adjacency(A: npt.ArrayLike) -> Matrix:
    """Return ``A`` as a float array after checking it is a simple undirected graph."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency must have a zero diagonal")
    if not np.all((A == 0) | (A == 1)):
        raise ValueError("adjacency entries must be 0 or 1")
    return A


def erdos_renyi(n: int, p: float, seed=None) -> Matrix:
    """Adjacency matrix of a G(n, p) random graph."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = _rng(seed)
    iu = np.triu_indices(n, 1)
    edges = rng.random(iu[0].shape[0]) < p
    A = np.zeros((n, n))
    A[iu] = edges
    return A + A.T


def laplacian_covariance(A: npt.ArrayLike) -> Matrix:
    """Regularised graph-Laplacian covariance ``(D - A + I)^{-1}``."""
    A = check_adjacency(A)
    P = np.diag(A.sum(axis=1)) - A + np.eye(A.shape[0])
    # P = L + I is SPD, so the Cholesky route is always available.
    C = linalg.cho_solve(linalg.cho_factor(P, lower=True), np.eye(A.shape[0]))
    return 0.5 * (C + C.T)


def toeplitz_covariance(n: int, rho: float = 0.5) -> Matrix:
    """AR(1)-style Toeplitz covariance with entries ``rho**|i-j|``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    return linalg.toeplitz(rho ** np.arange(n, dtype=np.float64))


def wishart_bartlett(n: int, dof: float, seed=None) -> Matrix:
    """Lower-triangular Bartlett factor ``A`` with ``A A^T ~ Wishart(I, dof)``."""
    rng = _rng(seed)
    A = np.tril(rng.standard_normal((n, n)), -1)
    A[np.diag_indices(n)] = np.sqrt(rng.chisquare(dof - np.arange(n)))
    return A


def inverse_wishart_covariance(n: int, dof: float | None = None, seed=None) -> Matrix:
    """One draw from Inverse-Wishart(I, dof).

    Samples ``W = A A^T`` by the Bartlett construction and returns ``W^{-1}``
    via triangular solves. ``dof`` defaults to ``n + 2``, the smallest integer
    value with a finite mean ``I / (dof - n - 1)``.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if dof is None:
        dof = n + 2
    if dof <= n + 1:
        raise ValueError(f"inverse-Wishart dof must exceed n + 1 = {n + 1}, got {dof}")
    A = wishart_bartlett(n, dof, seed)
    A_inv = linalg.solve_triangular(A, np.eye(n), lower=True)
    C = A_inv.T @ A_inv
    return 0.5 * (C + C.T)


def correlation_normalize(C: npt.ArrayLike) -> Matrix:
    """Rescale to unit diagonal: ``D^{-1/2} C D^{-1/2}`` with ``D = diag(C)``."""
    C = np.asarray(C, dtype=np.float64)
    d = np.diag(C)
    if np.any(d <= 0):
        raise ValueError("covariance diagonal must be strictly positive to normalise")
    s = 1.0 / np.sqrt(d)
    out = C * s[:, None] * s[None, :]
    out[np.diag_indices_from(out)] = 1.0
    return out


def expm_symmetric(A: npt.ArrayLike) -> Matrix:
    """Matrix exponential of a symmetric matrix by eigendecomposition."""
    A = np.asarray(A, dtype=np.float64)
    w, Q = linalg.eigh(A)
    E = (Q * np.exp(w)) @ Q.T
    return 0.5 * (E + E.T)


def expm_covariance(A: npt.ArrayLike) -> Matrix:
    """Spatial prior from an adjacency matrix: ``e^A`` normalised to unit diagonal."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T, rtol=0, atol=0):
        raise ValueError("expm_covariance needs a symmetric square matrix")
    return correlation_normalize(expm_symmetric(A))


STRUCTURES = ("laplacian", "toeplitz", "invwishart", "expm")


def generate(structure: str, n: int, *, p: float = 0.5, rho: float = 0.5,
             dof: float | None = None, seed=None, normalize: bool = False) -> Matrix:
    """Build one covariance of a named structure; used by the CLI and benchmark."""
    if structure == "laplacian":
        C = laplacian_covariance(erdos_renyi(n, p, seed))
    elif structure == "toeplitz":
        C = toeplitz_covariance(n, rho)
    elif structure == "invwishart":
        C = inverse_wishart_covariance(n, dof, seed)
    elif structure == "expm":
        C = expm_covariance(erdos_renyi(n, p, seed))
    else:
        raise ValueError(f"unknown structure {structure!r}; choose from {', '.join(STRUCTURES)}")
    return correlation_normalize(C) if normalize else C
