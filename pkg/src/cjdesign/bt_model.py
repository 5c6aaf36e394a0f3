"""Bradley-Terry model with a multivariate normal prior on the qualities.

Fits the posterior mode by damped Newton iterations and summarises the
posterior by its Laplace approximation. The resulting covariance is what a
second round of comparisons is scheduled from.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .core import DesignError, PriorSpec, SchedulingDistribution
from .rbd import RbdConfig
from .scheduler import approx_schedule

Vector = npt.NDArray[np.float64]

MAX_HALVINGS = 30


class SingularPriorError(DesignError, ValueError):
    """The prior covariance is not positive definite, so it has no inverse."""


@dataclass(frozen=True)
class PosteriorSummary:
    map_estimate: Vector
    covariance: npt.NDArray[np.float64]
    converged: bool
    iterations: int
    gradient_norm: float


class FitError(DesignError, RuntimeError):
    """Newton iterations did not reach the gradient tolerance."""

    def __init__(self, message: str, last: PosteriorSummary):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class ComparisonData:
    """Per-pair comparison counts: object ``first[k]`` beat ``second[k]``
    ``wins[k]`` times out of ``counts[k]`` (1-based, first < second)."""

    n_objects: int
    first: npt.NDArray[np.intp]
    second: npt.NDArray[np.intp]
    wins: Vector
    counts: Vector

    def __post_init__(self) -> None:
        if not (self.first.shape == self.second.shape == self.wins.shape == self.counts.shape):
            raise ValueError("comparison arrays must have equal length")
        if np.any(self.first >= self.second) or np.any(self.first < 1) or np.any(self.second > self.n_objects):
            raise ValueError("pairs must satisfy 1 <= i < j <= N")
        if np.any(self.wins < 0) or np.any(self.wins > self.counts):
            raise ValueError("need 0 <= wins <= comparisons for every pair")
        keys = self.first * (self.n_objects + 1) + self.second
        if np.unique(keys).shape[0] != keys.shape[0]:
            raise ValueError("each pair may appear only once; aggregate first")

    @classmethod
    def empty(cls, n: int) -> "ComparisonData":
        z = np.zeros(0, dtype=np.intp)
        return cls(n, z, z.copy(), np.zeros(0), np.zeros(0))

    @classmethod
    def from_counts(cls, n: int, rows: Iterable[tuple[int, int, float, float]]) -> "ComparisonData":
        """Aggregate ``(i, j, wins_for_i, comparisons)`` rows; order of i, j is free."""
        acc: dict[tuple[int, int], list[float]] = defaultdict(lambda: [0.0, 0.0])
        for i, j, y, c in rows:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"object {i} compared with itself")
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValueError(f"pair ({i}, {j}) outside 1..{n}")
            if i > j:
                i, j, y = j, i, c - y
            slot = acc[(i, j)]
            slot[0] += y
            slot[1] += c
        keys = sorted(acc)
        first = np.array([k[0] for k in keys], dtype=np.intp)
        second = np.array([k[1] for k in keys], dtype=np.intp)
        wins = np.array([acc[k][0] for k in keys], dtype=np.float64)
        counts = np.array([acc[k][1] for k in keys], dtype=np.float64)
        return cls(n, first, second, wins, counts)

    @classmethod
    def from_winners(cls, n: int, rows: Iterable[tuple[int, int, int]]) -> "ComparisonData":
        """Aggregate raw ``(i, j, winner)`` judgements."""
        def counts():
            for i, j, w in rows:
                if w not in (i, j):
                    raise ValueError(f"winner {w} is not part of pair ({i}, {j})")
                yield i, j, 1.0 if w == i else 0.0, 1.0
        return cls.from_counts(n, counts())

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def records(self) -> list[tuple[int, int, float, float]]:
        return list(zip(self.first.tolist(), self.second.tolist(), self.wins.tolist(), self.counts.tolist()))


def _prior_factor(prior: PriorSpec):
    try:
        return linalg.cho_factor(prior.covariance, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularPriorError("prior covariance must be positive definite") from exc


def _check(lam: npt.ArrayLike, data: ComparisonData, prior: PriorSpec) -> Vector:
    lam = np.asarray(lam, dtype=np.float64)
    if data.n_objects != prior.n_objects:
        raise ValueError(f"data cover {data.n_objects} objects but prior covers {prior.n_objects}")
    if lam.shape != (prior.n_objects,):
        raise ValueError(f"lambda must have length {prior.n_objects}")
    return lam


def _log_post(lam, data, prior, factor) -> float:
    x = lam[data.first - 1] - lam[data.second - 1]
    # log p = -log(1 + e^{-x}), log(1 - p) = -log(1 + e^{x})
    loglik = -(data.wins * np.logaddexp(0.0, -x) + (data.counts - data.wins) * np.logaddexp(0.0, x)).sum()
    dev = lam - prior.mean
    return float(loglik - 0.5 * dev @ linalg.cho_solve(factor, dev))


def _grad(lam, data, prior, factor) -> Vector:
    x = lam[data.first - 1] - lam[data.second - 1]
    p = 0.5 * (1.0 + np.tanh(0.5 * x))
    resid = data.wins - data.counts * p
    g = -linalg.cho_solve(factor, lam - prior.mean)
    np.add.at(g, data.first - 1, resid)
    np.add.at(g, data.second - 1, -resid)
    return g


def _neg_hessian(lam, data, prior, factor) -> npt.NDArray[np.float64]:
    n = prior.n_objects
    H = linalg.cho_solve(factor, np.eye(n))
    H = 0.5 * (H + H.T)
    x = lam[data.first - 1] - lam[data.second - 1]
    p = 0.5 * (1.0 + np.tanh(0.5 * x))
    w = data.counts * p * (1.0 - p)
    a, b = data.first - 1, data.second - 1
    np.add.at(H, (a, a), w)
    np.add.at(H, (b, b), w)
    np.add.at(H, (a, b), -w)
    np.add.at(H, (b, a), -w)
    return H


def log_posterior(lam: npt.ArrayLike, data: ComparisonData, prior: PriorSpec) -> float:
    """Unnormalised log posterior (binomial coefficients and prior constant dropped)."""
    lam = _check(lam, data, prior)
    return _log_post(lam, data, prior, _prior_factor(prior))


def log_posterior_grad(lam: npt.ArrayLike, data: ComparisonData, prior: PriorSpec) -> Vector:
    lam = _check(lam, data, prior)
    return _grad(lam, data, prior, _prior_factor(prior))


def negative_hessian(lam: npt.ArrayLike, data: ComparisonData, prior: PriorSpec) -> npt.NDArray[np.float64]:
    """Negative Hessian of the log posterior: ``C^{-1} + sum n p (1 - p) (e_i - e_j)(e_i - e_j)^T``."""
    lam = _check(lam, data, prior)
    return _neg_hessian(lam, data, prior, _prior_factor(prior))


def map_fit(data: ComparisonData, prior: PriorSpec, tol: float = 1e-8, max_iter: int = 100) -> PosteriorSummary:
    """Posterior mode and Laplace covariance.

    Newton steps from the prior mean, halving the step (at most 30 times)
    until the log posterior does not decrease. The objective is strictly
    concave for a positive definite prior, so the mode is unique.

    Raises
    ------
    SingularPriorError
        If the prior covariance has no Cholesky factor.
    FitError
        If ``max|grad| > tol`` after ``max_iter`` iterations; the exception
        carries the last iterate in ``.last``.
    """
    lam = _check(prior.mean, data, prior).copy()
    factor = _prior_factor(prior)
    f = _log_post(lam, data, prior, factor)
    g = _grad(lam, data, prior, factor)
    gnorm = float(np.abs(g).max())
    it = 0
    while gnorm > tol and it < max_iter:
        H = _neg_hessian(lam, data, prior, factor)
        step = linalg.solve(H, g, assume_a="pos")
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = lam + t * step
            f_cand = _log_post(cand, data, prior, factor)
            if f_cand >= f - 1e-13 * max(1.0, abs(f)):
                break
            t *= 0.5
        else:
            break
        lam, f = cand, f_cand
        g = _grad(lam, data, prior, factor)
        gnorm = float(np.abs(g).max())
        it += 1

    H = _neg_hessian(lam, data, prior, factor)
    Hf = linalg.cho_factor(H, lower=True)
    cov = linalg.cho_solve(Hf, np.eye(prior.n_objects))
    cov = 0.5 * (cov + cov.T)
    summary = PosteriorSummary(lam, cov, gnorm <= tol, it, gnorm)
    if not summary.converged:
        raise FitError(
            f"Newton iterations stopped after {it} steps with max|grad| = {gnorm:.3g} > {tol:g}",
            summary,
        )
    return summary


def two_phase_schedule(phase1: ComparisonData, prior: PriorSpec, cfg: RbdConfig = RbdConfig(),
                       tol: float = 1e-8, max_iter: int = 100) -> SchedulingDistribution:
    """Schedule a second round from the Laplace posterior of the first.

    The phase-two prior is ``N(0, Sigma)`` with ``Sigma`` the phase-one
    posterior covariance.
    """
    post = map_fit(phase1, prior, tol=tol, max_iter=max_iter)
    return approx_schedule(PriorSpec(post.covariance, np.zeros(prior.n_objects)), cfg)
