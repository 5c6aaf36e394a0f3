import math

import numpy as np
import pytest

from cjdesign import covgen
from cjdesign.core import validate_prior


def test_erdos_renyi_extremes():
    assert np.array_equal(covgen.erdos_renyi(4, 0.0, seed=1), np.zeros((4, 4)))
    full = covgen.erdos_renyi(4, 1.0, seed=1)
    assert np.array_equal(full, np.ones((4, 4)) - np.eye(4))


def test_erdos_renyi_edge_count_binomial():
    n, p = 64, 0.5
    m = n * (n - 1) // 2
    A = covgen.erdos_renyi(n, p, seed=11)
    edges = A[np.triu_indices(n, 1)].sum()
    assert abs(edges - p * m) <= 4 * math.sqrt(m * p * (1 - p))
    assert np.array_equal(A, A.T) and np.all(np.diag(A) == 0)


def test_erdos_renyi_reproducible():
    assert np.array_equal(covgen.erdos_renyi(20, 0.3, seed=5), covgen.erdos_renyi(20, 0.3, seed=5))


def test_laplacian_two_nodes():
    C = covgen.laplacian_covariance(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(C, np.array([[2, 1], [1, 2]]) / 3, atol=1e-15)


def test_laplacian_empty_graph_is_identity():
    np.testing.assert_allclose(covgen.laplacian_covariance(np.zeros((3, 3))), np.eye(3), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_laplacian_inverse_and_pd(seed):
    A = covgen.erdos_renyi(15, 0.3, seed=seed)
    C = covgen.laplacian_covariance(A)
    P = np.diag(A.sum(1)) - A + np.eye(15)
    np.testing.assert_allclose(C @ P, np.eye(15), atol=1e-10)
    assert np.linalg.eigvalsh(C).min() > 0
    assert validate_prior(C).ok


def test_toeplitz_values():
    C = covgen.toeplitz_covariance(3, 0.5)
    np.testing.assert_array_equal(C, [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])
    C8 = covgen.toeplitz_covariance(8)
    assert np.all(np.diag(C8) == 1)
    assert np.linalg.eigvalsh(C8).min() > 0


def test_toeplitz_rejects_bad_rho():
    with pytest.raises(ValueError):
        covgen.toeplitz_covariance(3, 1.0)


def test_inverse_wishart_basic():
    C = covgen.inverse_wishart_covariance(6, seed=3)
    assert np.allclose(C, C.T)
    assert np.linalg.eigvalsh(C).min() > 0
    np.testing.assert_array_equal(C, covgen.inverse_wishart_covariance(6, seed=3))
    assert validate_prior(C).ok


def test_inverse_wishart_rejects_low_dof():
    with pytest.raises(ValueError):
        covgen.inverse_wishart_covariance(4, dof=5)
    with pytest.raises(ValueError):
        covgen.inverse_wishart_covariance(4, dof=4)


def test_inverse_wishart_mean_matches_known_moments():
    # Known moments of IW(I, nu) in p dims: mean I/(nu-p-1); entry variances
    # 2/((nu-p-1)^2 (nu-p-3)) on the diagonal and 1/((nu-p)(nu-p-1)(nu-p-3)) off it.
    p, nu, draws = 4, 10, 10_000
    rng = np.random.default_rng(99)
    total = np.zeros((p, p))
    for _ in range(draws):
        total += covgen.inverse_wishart_covariance(p, nu, seed=rng)
    mean = total / draws
    a = nu - p - 1
    var_diag = 2 / (a * a * (nu - p - 3))
    var_off = (nu - p - 1) / ((nu - p) * a * a * (nu - p - 3))
    se = np.where(np.eye(p, dtype=bool), math.sqrt(var_diag / draws), math.sqrt(var_off / draws))
    assert np.all(np.abs(mean - np.eye(p) / a) < 5 * se)


def test_bartlett_factor_structure():
    A = covgen.wishart_bartlett(5, 9, seed=0)
    assert np.all(np.triu(A, 1) == 0)
    assert np.all(np.diag(A) > 0)


def test_correlation_normalize():
    C = np.array([[4.0, 3.0], [3.0, 9.0]])
    np.testing.assert_allclose(covgen.correlation_normalize(C), [[1, 0.5], [0.5, 1]], atol=1e-15)
    np.testing.assert_array_equal(covgen.correlation_normalize(np.eye(3)), np.eye(3))
    out = covgen.correlation_normalize(covgen.inverse_wishart_covariance(7, seed=1))
    assert np.max(np.abs(np.diag(out) - 1)) <= 1e-14
    with pytest.raises(ValueError):
        covgen.correlation_normalize(np.diag([1.0, 0.0]))


def test_expm_zero_is_identity():
    np.testing.assert_allclose(covgen.expm_covariance(np.zeros((4, 4))), np.eye(4), atol=1e-15)


def test_expm_two_node_closed_form():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    E = covgen.expm_symmetric(A)
    np.testing.assert_allclose(E, [[math.cosh(1), math.sinh(1)], [math.sinh(1), math.cosh(1)]], rtol=1e-14)
    C = covgen.expm_covariance(A)
    assert C[0, 1] == pytest.approx(math.tanh(1.0), abs=1e-14)
    assert C[0, 1] == pytest.approx(0.761594, abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_expm_inverse_property(seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((6, 6))
    A = 0.5 * (B + B.T)
    np.testing.assert_allclose(covgen.expm_symmetric(A) @ covgen.expm_symmetric(-A), np.eye(6), atol=1e-10)


def test_expm_covariance_valid():
    C = covgen.expm_covariance(covgen.erdos_renyi(30, 0.2, seed=2))
    assert np.max(np.abs(np.diag(C) - 1)) <= 1e-14
    assert np.linalg.eigvalsh(C).min() > 0
    assert validate_prior(C).ok


@pytest.mark.parametrize("structure", covgen.STRUCTURES)
def test_generate_outputs_pass_validation(structure):
    C = covgen.generate(structure, 12, seed=4, normalize=True)
    assert validate_prior(C).ok
    np.testing.assert_allclose(np.diag(C), 1.0, atol=1e-14)


def test_check_adjacency_rejects():
    with pytest.raises(ValueError):
        covgen.check_adjacency(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        covgen.check_adjacency(np.array([[1, 0], [0, 0]]))
    with pytest.raises(ValueError):
        covgen.check_adjacency(np.array([[0, 2], [2, 0]]))
