"""The two kernel backends (compiled and plain-numpy) agree bit-for-bit up
to accumulation-order roundoff, and the backend switch is honored."""

import math
import subprocess
import sys

import numpy as np
import pytest

from levyou import _kernels


def _numba_backend_or_skip():
    try:
        return _kernels._build_numba_backend()
    except Exception:
        pytest.skip("compiled backend unavailable")


@pytest.fixture(scope="module")
def numba_backend():
    return _numba_backend_or_skip()


def test_cms_backends_agree(numba_backend, rng):
    for alpha in (0.7, 1.5, 1.9):
        U = rng.uniform(-math.pi / 2, math.pi / 2, 10_000)
        W = rng.exponential(1.0, 10_000)
        a = _kernels._np_cms_standard_skewed(alpha, U, W)
        b = numba_backend["cms_standard_skewed"](alpha, U, W)
        assert np.max(np.abs(a - b) / (1.0 + np.abs(a))) < 1e-12


def test_scatter_backends_agree(numba_backend, rng):
    n_paths, n_jumps, d = 50, 2_000, 3
    idx = rng.integers(0, n_paths, n_jumps)
    vecs = rng.standard_normal((n_jumps, d))
    acc_a = np.zeros((n_paths, d))
    acc_b = np.zeros((n_paths, d))
    _kernels._np_scatter_add_jumps(acc_a, idx, vecs)
    numba_backend["scatter_add_jumps"](acc_b, idx, vecs)
    assert np.max(np.abs(acc_a - acc_b)) < 1e-12


def test_combine_backends_agree(numba_backend, rng):
    n, K, d = 5_000, 4, 2
    Z = rng.standard_normal((n, K))
    gammas = rng.uniform(0.5, 2.0, K)
    shifts = rng.standard_normal(K)
    dirs = rng.standard_normal((K, d))
    a = _kernels._np_combine_stable_atoms(Z, gammas, shifts, dirs)
    b = numba_backend["combine_stable_atoms"](Z, gammas, shifts, dirs)
    assert np.max(np.abs(a - b)) < 1e-12


def test_cf_backends_agree(numba_backend, rng):
    X = rng.standard_normal((20_000, 2))
    xi = rng.standard_normal((7, 2))
    a = _kernels._np_empirical_cf_sum(X, np.ascontiguousarray(xi))
    b = numba_backend["empirical_cf_sum"](X, np.ascontiguousarray(xi))
    assert np.max(np.abs(a - b)) < 1e-7 * X.shape[0]


def _backend_name_in_subprocess(env_value):
    code = ("import levyou._kernels as k; print(k.active_backend_name())")
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "LEVYOU_BACKEND": env_value},
    )
    return out


def test_backend_env_numpy():
    out = _backend_name_in_subprocess("numpy")
    assert out.returncode == 0
    assert out.stdout.strip() == "numpy"


def test_backend_env_invalid_rejected():
    out = _backend_name_in_subprocess("fortran")
    assert out.returncode != 0
    assert "LEVYOU_BACKEND" in out.stderr
