"""Standard scheduling design: build the dense pairs-of-pairs covariance and
decompose it fully.

This is the expensive baseline (O(N^4) memory, O(N^6) time). It doubles as
the correctness oracle for the reduced-basis path, together with
:func:`closed_form_schedule`, which needs no decomposition at all.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import linalg

from . import kernels
from .core import (
    DegeneratePriorError,
    DesignError,
    PriorSpec,
    SchedulingDistribution,
    n_pairs,
    validate_prior,
)

#: Total pair variance at or below this fraction of ``variance_scale`` is
#: treated as zero (roundoff from a prior proportional to 11^T).
DEGENERATE_RTOL = 1e-12

#: Largest N for which the dense M x M matrix is built without ``force``.
DEFAULT_MAX_OBJECTS = 256


class MemoryCapError(DesignError, MemoryError):
    """Refusal to allocate the dense pairs-of-pairs matrix."""


class NumericalError(DesignError, ArithmeticError):
    pass


@dataclass(frozen=True)
class DeltaModel:
    """Distribution of all pairwise differences: mean ``nu`` and covariance ``delta``."""

    n_objects: int
    nu: npt.NDArray[np.float64]
    delta: npt.NDArray[np.float64]


@dataclass(frozen=True)
class EigenpairSet:
    """Eigenvalues in nonincreasing order with eigenvectors as columns.

    ``clamped`` counts negative roundoff eigenvalues that were set to zero.
    """

    values: npt.NDArray[np.float64]
    vectors: npt.NDArray[np.float64]
    clamped: int = 0

    def __len__(self) -> int:
        return self.values.shape[0]


def _check_cap(n: int, max_objects: int | None) -> None:
    if max_objects is not None and n > max_objects:
        m = n_pairs(n)
        gib = 8 * m * m / 2**30
        raise MemoryCapError(
            f"dense design for N={n} needs a {m}x{m} matrix (~{gib:.1f} GiB); "
            f"cap is N <= {max_objects}. Pass force/--force-dense to override, or use the rbd method"
        )


def build_delta(spec: PriorSpec, *, max_objects: int | None = DEFAULT_MAX_OBJECTS,
                backend: str | None = None) -> DeltaModel:
    """Materialise ``nu`` and the dense M x M covariance of pairwise differences."""
    validate_prior(spec).raise_if_failed()
    n = spec.n_objects
    _check_cap(n, max_objects)
    kern = kernels.resolve(backend)
    C = np.ascontiguousarray(spec.covariance)
    delta = kern.fill_delta(C)
    nu = kern.diff_matvec(np.ascontiguousarray(spec.mean), n)
    return DeltaModel(n, nu, delta)


def full_spectrum(model: DeltaModel) -> EigenpairSet:
    """Complete symmetric eigendecomposition of the dense matrix, largest first."""
    try:
        w, U = linalg.eigh(model.delta, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    w = w[::-1].copy()
    U = U[:, ::-1]
    negative = w < 0
    w[negative] = 0.0
    return EigenpairSet(w, U, int(negative.sum()))


def variance_scale(spec: PriorSpec) -> float:
    """Upper bound ``N * sum |C_ii|`` on the total pair variance, used to judge degeneracy."""
    return spec.n_objects * float(np.abs(np.diag(spec.covariance)).sum())


def schedule_from_eigenpairs(n: int, pairs: EigenpairSet, backend: str | None = None,
                             scale: float = 0.0) -> npt.NDArray[np.float64]:
    """Eigenvalue-weighted squared loadings per pair, normalised by total variance.

    A total variance of at most ``DEGENERATE_RTOL * scale`` counts as zero.
    """
    total = float(pairs.values.sum())
    if not total > DEGENERATE_RTOL * scale:
        raise DegeneratePriorError(
            "every pairwise difference has zero prior variance (e.g. C proportional to 11^T); "
            "no design can be formed"
        )
    q = kernels.resolve(backend).weighted_row_sumsq(pairs.vectors, np.ascontiguousarray(pairs.values))
    return q / total


def exact_schedule(spec: PriorSpec, *, max_objects: int | None = DEFAULT_MAX_OBJECTS,
                   backend: str | None = None) -> SchedulingDistribution:
    """Scheduling distribution by the standard dense method."""
    t0 = time.perf_counter()
    model = build_delta(spec, max_objects=max_objects, backend=backend)
    pairs = full_spectrum(model)
    q = schedule_from_eigenpairs(spec.n_objects, pairs, backend, scale=variance_scale(spec))
    elapsed = time.perf_counter() - t0
    return SchedulingDistribution(
        spec.n_objects, q,
        {"method": "exact", "clamped": pairs.clamped, "seconds": elapsed},
    )


def closed_form_schedule(spec: PriorSpec, backend: str | None = None) -> SchedulingDistribution:
    """Scheduling distribution from pair variances alone.

    Summing eigenvalue-weighted squared loadings over the complete spectrum
    reproduces the diagonal of the pairs-of-pairs covariance, so
    ``q_r = Var(lambda_i - lambda_j) / sum_s Var(...)`` exactly. O(N^2).
    """
    validate_prior(spec).raise_if_failed()
    t0 = time.perf_counter()
    var = kernels.resolve(backend).pair_variances(np.ascontiguousarray(spec.covariance))
    var = np.maximum(var, 0.0)
    total = float(var.sum())
    if not total > DEGENERATE_RTOL * variance_scale(spec):
        raise DegeneratePriorError("every pairwise difference has zero prior variance")
    return SchedulingDistribution(
        spec.n_objects, var / total,
        {"method": "closed", "seconds": time.perf_counter() - t0},
    )


def numerical_rank(values: npt.ArrayLike, rel_tol: float = 1e-10) -> int:
    """Count singular/eigen values above ``rel_tol * max``."""
    s = np.abs(np.asarray(values, dtype=np.float64))
    if s.size == 0 or s.max() == 0:
        return 0
    return int((s > rel_tol * s.max()).sum())
