"""Canonical pair indexing and the shared value types.

Objects are numbered 1..N and pairs (i, j) with i < j are laid out in the
order (1,2), (1,3), ..., (1,N), (2,3), ..., (N-1,N); ``r`` is the 1-based
position of a pair in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-8


class DesignError(Exception):
    """Base class for errors raised by cjdesign."""


class DegeneratePriorError(DesignError, ValueError):
    """The prior gives zero variance to every pairwise difference."""


class PriorValidationError(DesignError, ValueError):
    """A covariance matrix failed symmetry, PSD or shape checks."""


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def _block_start(i: int, n: int) -> int:
    # number of pairs preceding the block of first index i (1-based)
    return n_pairs(n) - (n - i + 1) * (n - i) // 2


def pair_to_index(i: int, j: int, n: int) -> int:
    """Linear index r of the pair (i, j), 1 <= i < j <= n."""
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= N, got i={i}, j={j}, N={n}")
    return _block_start(i, n) + j - i


def index_to_pair(r: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`pair_to_index`."""
    m = n_pairs(n)
    if not (1 <= r <= m):
        raise ValueError(f"pair index must lie in 1..{m}, got {r}")
    # remaining = number of pairs from r to the end, inclusive; block i owns
    # the last (N-i+1)(N-i)/2 of them.
    remaining = m - r + 1
    k = (1 + math.isqrt(8 * remaining - 7)) // 2  # smallest k with k(k-1)/2 >= remaining, approx
    while k * (k - 1) // 2 < remaining:
        k += 1
    while (k - 1) * (k - 2) // 2 >= remaining:
        k -= 1
    i = n - k + 1
    j = r - _block_start(i, n) + i
    return i, j


def pair_arrays(n: int) -> tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]:
    """1-based (i, j) arrays for all pairs in canonical order."""
    i, j = np.triu_indices(n, 1)
    return i + 1, j + 1


def _frozen(a: npt.ArrayLike, ndim: int, name: str) -> npt.NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise PriorValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriorSpec:
    """Multivariate normal prior N(mean, covariance) over N object qualities.

    The design only reads ``covariance``; ``mean`` is carried so that a
    prior round-trips intact. Construction checks shapes only; call
    :func:`validate_prior` for the numerical checks.
    """

    covariance: npt.NDArray[np.float64]
    mean: npt.NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        cov = _frozen(self.covariance, 2, "covariance")
        if cov.shape[0] != cov.shape[1]:
            raise PriorValidationError(f"covariance must be square, got shape {cov.shape}")
        if cov.shape[0] < 2:
            raise PriorValidationError("need at least two objects")
        mean = np.zeros(cov.shape[0]) if self.mean is None else self.mean
        mean = _frozen(mean, 1, "mean")
        if mean.shape[0] != cov.shape[0]:
            raise PriorValidationError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def n_objects(self) -> int:
        return self.covariance.shape[0]


@dataclass(frozen=True)
class ValidationReport:
    n_objects: int
    symmetry_error: float
    min_eigenvalue: float
    psd_threshold: float
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def raise_if_failed(self) -> None:
        if self.problems:
            raise PriorValidationError("; ".join(self.problems))


def validate_prior(spec: PriorSpec | npt.ArrayLike, mean: npt.ArrayLike | None = None) -> ValidationReport:
    """Check symmetry, positive semidefiniteness and dimensions of a prior.

    Accepts a :class:`PriorSpec` or a raw covariance matrix (with optional
    mean). Never raises on bad input; inspect ``report.ok``.
    """
    problems: list[str] = []
    if isinstance(spec, PriorSpec):
        C, mu = spec.covariance, spec.mean
    else:
        C = np.asarray(spec, dtype=np.float64)
        mu = None if mean is None else np.asarray(mean, dtype=np.float64)

    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        problems.append(f"covariance is not square: shape {C.shape}")
        return ValidationReport(0, math.inf, -math.inf, 0.0, tuple(problems))
    n = C.shape[0]
    if mu is not None and mu.shape != (n,):
        problems.append(f"mean has shape {mu.shape}, expected ({n},)")
    if not np.all(np.isfinite(C)):
        problems.append("covariance contains non-finite entries")
        return ValidationReport(n, math.inf, -math.inf, 0.0, tuple(problems))

    scale = float(np.abs(C).sum(axis=1).max()) if n else 0.0
    asym = float(np.abs(C - C.T).sum(axis=1).max()) if n else 0.0
    sym_err = asym / scale if scale > 0 else asym
    if sym_err > SYMMETRY_TOL:
        problems.append(f"covariance not symmetric: relative asymmetry {sym_err:.3g} > {SYMMETRY_TOL:g}")

    eig = np.linalg.eigvalsh(0.5 * (C + C.T)) if n else np.zeros(0)
    min_eig = float(eig[0]) if n else 0.0
    threshold = -PSD_TOL * scale
    if min_eig < threshold:
        problems.append(f"covariance not positive semidefinite: min eigenvalue {min_eig:.6g}")
    return ValidationReport(n, sym_err, min_eig, threshold, tuple(problems))


@dataclass(frozen=True)
class SchedulingDistribution:
    """Probabilities over all unordered pairs, in canonical order.

    ``info`` holds provenance such as the method, basis size and timings.
    """

    n_objects: int
    probs: npt.NDArray[np.float64]
    info: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        m = n_pairs(self.n_objects)
        if probs.shape != (m,):
            raise ValueError(f"expected {m} probabilities for N={self.n_objects}, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n_pairs(self) -> int:
        return self.probs.shape[0]

    def prob(self, i: int, j: int) -> float:
        """Probability of the unordered pair {i, j}."""
        if i > j:
            i, j = j, i
        return float(self.probs[pair_to_index(i, j, self.n_objects) - 1])

    def pairs(self):
        """Iterate over ``(i, j, q)`` in canonical order."""
        ii, jj = pair_arrays(self.n_objects)
        for i, j, q in zip(ii.tolist(), jj.tolist(), self.probs.tolist()):
            yield i, j, q
