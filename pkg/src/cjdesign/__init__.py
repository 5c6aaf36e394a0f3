"""Scheduling designs for Bradley-Terry comparative judgement studies.

The exact design decomposes the dense covariance of all pairwise quality
differences; the reduced basis design gets the same distribution from a
greedy low-dimensional basis of the sparse difference operator, without
forming that matrix.
"""

from .core import (
    DegeneratePriorError,
    DesignError,
    PriorSpec,
    PriorValidationError,
    SchedulingDistribution,
    index_to_pair,
    pair_to_index,
    validate_prior,
)
from .exact_design import closed_form_schedule, exact_schedule
from .kernels import BACKEND
from .rbd import RbdConfig, ReducedBasis, ToleranceWarning, rbd
from .scheduler import approx_schedule, kl_divergence, sample_pairs

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DegeneratePriorError",
    "DesignError",
    "PriorSpec",
    "PriorValidationError",
    "RbdConfig",
    "ReducedBasis",
    "SchedulingDistribution",
    "ToleranceWarning",
    "approx_schedule",
    "closed_form_schedule",
    "exact_schedule",
    "index_to_pair",
    "kl_divergence",
    "pair_to_index",
    "rbd",
    "sample_pairs",
    "validate_prior",
]
