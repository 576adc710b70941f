"""Numerical hot-path kernels with two interchangeable backends.

The sampler's inner loops — per-atom stable draws, jump scatter-accumulation,
and empirical characteristic functions — exist twice: a numba-compiled
version and a pure-numpy version with identical semantics.  The active
backend is picked once per process:

  * LEVYOU_BACKEND=numba   force the compiled backend (error if unavailable),
  * LEVYOU_BACKEND=numpy   force the plain-numpy backend,
  * unset / auto           numba when importable, numpy otherwise.

All random draws happen OUTSIDE these kernels, so both backends consume the
same streams and agree to within accumulation-order roundoff (tested at
1e-12).  LEVYOU_THREADS, when set, caps the numba thread pool.

`benchmarks/bench_kernels.py` times one backend against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "active_backend_name",
    "get_backend",
    "cms_standard_skewed",
    "scatter_add_jumps",
    "combine_stable_atoms",
    "empirical_cf_sum",
]


# ---------------------------------------------------------------------------
# pure-numpy reference implementations
# ---------------------------------------------------------------------------

def _np_cms_standard_skewed(alpha: float, U: np.ndarray,
                            W: np.ndarray) -> np.ndarray:
    """Standard totally-skewed stable variate from uniforms and exponentials.

    U ~ Uniform(-pi/2, pi/2), W ~ Exp(1); returns the Chambers-Mallows-Stuck
    transform for a maximally right-skewed stable law of index alpha != 1,
    unit scale, in the parameterization whose characteristic function matches
    the per-direction radial integral used by the exponent evaluators.
    """
    t0 = math.atan(math.tan(math.pi * alpha / 2.0)) / alpha
    cos_at0 = math.cos(alpha * t0)
    su = np.sin(alpha * (U + t0))
    cu = np.cos(U)
    base = su / (cos_at0 * cu) ** (1.0 / alpha)
    ratio = np.cos(alpha * t0 + (alpha - 1.0) * U) / W
    return base * np.sign(ratio) * np.abs(ratio) ** ((1.0 - alpha) / alpha)


def _np_scatter_add_jumps(acc: np.ndarray, path_index: np.ndarray,
                          vectors: np.ndarray) -> None:
    """acc[path_index[i]] += vectors[i] for every jump i, in index order."""
    np.add.at(acc, path_index, vectors)


def _np_combine_stable_atoms(Z: np.ndarray, gammas: np.ndarray,
                             shifts: np.ndarray,
                             directions: np.ndarray) -> np.ndarray:
    """Per-path stable step increment: sum_k (gamma_k Z[:,k] + shift_k) e_k."""
    return (Z * gammas[None, :] + shifts[None, :]) @ directions


def _np_empirical_cf_sum(X: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """sum_j exp(i <xi_m, X_j>) for each row xi_m; caller divides by count."""
    out = np.zeros(xi.shape[0], dtype=np.complex128)
    block = 100_000
    for start in range(0, X.shape[0], block):
        phases = X[start:start + block] @ xi.T
        out += np.exp(1j * phases).sum(axis=0)
    return out


_NUMPY_BACKEND = {
    "name": "numpy",
    "cms_standard_skewed": _np_cms_standard_skewed,
    "scatter_add_jumps": _np_scatter_add_jumps,
    "combine_stable_atoms": _np_combine_stable_atoms,
    "empirical_cf_sum": _np_empirical_cf_sum,
}


# ---------------------------------------------------------------------------
# numba implementations (same math, explicit loops)
# ---------------------------------------------------------------------------

def _build_numba_backend():
    import numba

    threads = os.environ.get("LEVYOU_THREADS")
    if threads:
        numba.set_num_threads(max(1, int(threads)))

    @numba.njit(cache=True)
    def nb_cms(alpha, U, W):
        t0 = math.atan(math.tan(math.pi * alpha / 2.0)) / alpha
        cos_at0 = math.cos(alpha * t0)
        n = U.shape[0]
        out = np.empty(n)
        for i in range(n):
            su = math.sin(alpha * (U[i] + t0))
            cu = math.cos(U[i])
            base = su / (cos_at0 * cu) ** (1.0 / alpha)
            ratio = math.cos(alpha * t0 + (alpha - 1.0) * U[i]) / W[i]
            sgn = 1.0 if ratio >= 0.0 else -1.0
            out[i] = base * sgn * abs(ratio) ** ((1.0 - alpha) / alpha)
        return out

    @numba.njit(cache=True)
    def nb_scatter(acc, path_index, vectors):
        d = acc.shape[1]
        for i in range(path_index.shape[0]):
            p = path_index[i]
            for j in range(d):
                acc[p, j] += vectors[i, j]

    @numba.njit(cache=True)
    def nb_combine(Z, gammas, shifts, directions):
        n, K = Z.shape
        d = directions.shape[1]
        out = np.zeros((n, d))
        for i in range(n):
            for k in range(K):
                amp = Z[i, k] * gammas[k] + shifts[k]
                for j in range(d):
                    out[i, j] += amp * directions[k, j]
        return out

    @numba.njit(cache=True)
    def nb_cf_sum(X, xi):
        n, d = X.shape
        m = xi.shape[0]
        out = np.zeros(m, dtype=np.complex128)
        for q in range(m):
            re = 0.0
            im = 0.0
            for i in range(n):
                phase = 0.0
                for j in range(d):
                    phase += X[i, j] * xi[q, j]
                re += math.cos(phase)
                im += math.sin(phase)
            out[q] = re + 1j * im
        return out

    return {
        "name": "numba",
        "cms_standard_skewed": nb_cms,
        "scatter_add_jumps": nb_scatter,
        "combine_stable_atoms": nb_combine,
        "empirical_cf_sum": nb_cf_sum,
    }


_ACTIVE: dict | None = None


def get_backend() -> dict:
    """The active kernel backend, resolved once per process."""
    global _ACTIVE
    if _ACTIVE is not None:
        return _ACTIVE
    choice = os.environ.get("LEVYOU_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"LEVYOU_BACKEND must be auto, numba, or numpy (got {choice!r})"
        )
    if choice == "numpy":
        _ACTIVE = _NUMPY_BACKEND
    elif choice == "numba":
        _ACTIVE = _build_numba_backend()
    else:
        try:
            _ACTIVE = _build_numba_backend()
        except Exception:
            _ACTIVE = _NUMPY_BACKEND
    return _ACTIVE


def active_backend_name() -> str:
    return get_backend()["name"]


def cms_standard_skewed(alpha: float, U: np.ndarray,
                        W: np.ndarray) -> np.ndarray:
    return get_backend()["cms_standard_skewed"](float(alpha), U, W)


def scatter_add_jumps(acc: np.ndarray, path_index: np.ndarray,
                      vectors: np.ndarray) -> None:
    get_backend()["scatter_add_jumps"](acc, path_index, vectors)


def combine_stable_atoms(Z: np.ndarray, gammas: np.ndarray,
                         shifts: np.ndarray,
                         directions: np.ndarray) -> np.ndarray:
    return get_backend()["combine_stable_atoms"](Z, gammas, shifts,
                                                 directions)


def empirical_cf_sum(X: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return get_backend()["empirical_cf_sum"](X, xi)
