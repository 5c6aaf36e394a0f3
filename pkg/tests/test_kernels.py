"""Compiled and numpy kernels must agree; the numpy ones are the reference."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cjdesign import _pykernels, kernels
from cjdesign.core import n_pairs

pytestmark = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                                reason="compiled kernels not built")

compiled = kernels.get_backend("compiled") if "compiled" in kernels.available_backends() else None


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 25), seed=st.integers(0, 2**32 - 1))
def test_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    m = n_pairs(n)
    B = rng.standard_normal((n, n))
    C = B @ B.T
    v = rng.standard_normal(n)
    x = rng.standard_normal(m)
    np.testing.assert_array_equal(compiled.diff_matvec(v, n), _pykernels.diff_matvec(v, n))
    np.testing.assert_allclose(compiled.diff_rmatvec(x, n), _pykernels.diff_rmatvec(x, n), atol=1e-12)
    k = int(rng.integers(n))
    np.testing.assert_array_equal(compiled.diff_column(k, n), _pykernels.diff_column(k, n))
    np.testing.assert_allclose(compiled.fill_delta(C), _pykernels.fill_delta(C), atol=1e-12)
    np.testing.assert_allclose(compiled.pair_variances(C), _pykernels.pair_variances(C), atol=1e-12)
    d = int(rng.integers(1, 6))
    Z = rng.standard_normal((m, d))
    w = rng.random(d)
    np.testing.assert_allclose(compiled.weighted_row_sumsq(Z, w), _pykernels.weighted_row_sumsq(Z, w),
                               rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(compiled.weighted_row_sumsq(np.asfortranarray(Z), w),
                               _pykernels.weighted_row_sumsq(Z, w), rtol=1e-13, atol=1e-13)


def test_mgs_sweep_agrees_and_orthogonalises(rng):
    m, d = 200, 7
    Q = np.linalg.qr(rng.standard_normal((m, d)))[0].T.copy()
    v0 = rng.standard_normal(m)
    out = {}
    for name, mod in (("compiled", compiled), ("python", _pykernels)):
        v, h = v0.copy(), np.zeros(d)
        mod.mgs_sweep(Q, d, v, h)
        out[name] = (v, h)
        assert np.abs(Q @ v).max() < 1e-13
        np.testing.assert_allclose(v + Q.T @ h, v0, atol=1e-13)
    np.testing.assert_allclose(out["compiled"][0], out["python"][0], atol=1e-13)
    np.testing.assert_allclose(out["compiled"][1], out["python"][1], atol=1e-13)


def test_mgs_sweep_zero_basis_is_noop(rng):
    v = rng.standard_normal(10)
    w = v.copy()
    compiled.mgs_sweep(np.zeros((3, 10)), 0, w, np.zeros(3))
    np.testing.assert_array_equal(v, w)


def test_get_backend_names():
    assert kernels.get_backend("python") is _pykernels
    assert kernels.get_backend("auto") is compiled
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_override_selects_python(monkeypatch):
    import importlib

    monkeypatch.setenv("CJDESIGN_BACKEND", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.fill_delta is _pykernels.fill_delta
    finally:
        monkeypatch.delenv("CJDESIGN_BACKEND")
        importlib.reload(kernels)
