"""Monte Carlo sampling of the Levy-driven OU process.

Finite-activity models (no jumps, finite atoms, gridded compound Poisson) are
sampled EXACTLY at time t:

    X_t = e^{tB} x + N(0, Q_t) + sum_i e^{(t - s_i)B} J_i - comp(t),

with a Poisson jump count, uniform jump times, jump sizes drawn from the same
atom cloud the exponent evaluators integrate over, and the compensator drift
comp(t) = int_0^t e^{sB} (int_{|y|<=1} y Pi(dy)) ds subtracted once per path.

Stable models use an Euler scheme: the Gaussian-plus-drift part advances
exactly over each step (e^{dt B} map plus an N(0, Q_dt) increment), and each
spherical atom contributes an exact stable increment for the step via the
Chambers-Mallows-Stuck transform, plus the deterministic rate correction that
matches the compensated exponent convention.

Randomness is counter-based (Philox) and chunked: chunk c of 10^4 paths draws
from Generator(Philox(SeedSequence(entropy=seed, spawn_key=(c,)))) in a fixed
order, so results are bitwise reproducible for a given backend, independent
of how chunks would be scheduled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.special import gamma as _gamma_fn

from . import _jsonfmt, _kernels, levy, matops

__all__ = [
    "SamplerConfig",
    "CHUNK_SIZE",
    "sample_transition",
    "empirical_cf",
    "mc_semigroup_apply",
    "write_samples",
    "stable_tail_constant",
]

CHUNK_SIZE = 10_000


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler knobs: 64-bit seed, number of paths, and the stable-scheme
    time step (ignored by the exact sampler; defaults to t/1024)."""

    seed: int
    sample_count: int
    time_step: float | None = None

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if self.time_step is not None and self.time_step <= 0:
            raise ValueError("time_step must be positive")


def _chunk_rng(seed: int, chunk: int) -> Generator:
    return Generator(Philox(SeedSequence(entropy=int(seed),
                                         spawn_key=(int(chunk),))))


def stable_tail_constant(alpha: float) -> float:
    """C_alpha = -Gamma(-alpha) cos(pi alpha / 2) > 0 for alpha in (0,2)\\{1};
    the constant linking the radial tail normalization to the stable scale."""
    return float(-_gamma_fn(-alpha) * math.cos(math.pi * alpha / 2.0))


# ---------------------------------------------------------------------------
# jump helpers for the exact sampler
# ---------------------------------------------------------------------------

def _atom_cloud(pi: levy.JumpSpec):
    """(points, weights, total_rate) of the finite-activity jump measure."""
    if isinstance(pi, levy.FiniteAtomicJumps):
        return pi.locations, pi.weights, float(np.sum(pi.weights))
    if isinstance(pi, levy.CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
        return pts, w, float(np.sum(w))
    raise TypeError("not a finite-activity jump measure")


def _propagators(model: levy.OuModel):
    """Fast path data for evaluating e^{uB} v over many u values."""
    sd = model.spectral
    if sd.diagonalizable:
        evals, P = np.linalg.eig(model.B)
        return ("eig", evals, P, np.linalg.inv(P))
    return ("expm", None, None, None)


def _propagate_jumps(model, prop, u: np.ndarray, J: np.ndarray) -> np.ndarray:
    """e^{u_i B} J_i for every jump i (u holds remaining times t - s_i)."""
    kind = prop[0]
    if kind == "eig":
        _, evals, P, Pinv = prop
        W = J.astype(complex) @ Pinv.T
        W = W * np.exp(np.outer(u, evals))
        return np.real(W @ P.T)
    mats = matops.expm_batch(model.B, u)
    return np.einsum("kij,kj->ki", mats, J)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _sample_exact_chunk(model, x, t, rng, n, shared) -> np.ndarray:
    Et, chol, comp, cloud, prop = shared
    d = model.d
    X = np.tile(Et @ x, (n, 1))
    X += rng.standard_normal((n, d)) @ chol.T
    if cloud is not None:
        pts, w, rate = cloud
        counts = rng.poisson(rate * t, size=n)
        total = int(counts.sum())
        if total:
            times = rng.uniform(0.0, t, size=total)
            sel = np.searchsorted(np.cumsum(w) / rate,
                                  rng.random(total), side="right")
            sel = np.minimum(sel, len(w) - 1)
            jumps = pts[sel]
            path_index = np.repeat(np.arange(n), counts)
            vecs = _propagate_jumps(model, prop, t - times, jumps)
            acc = np.zeros((n, d))
            _kernels.scatter_add_jumps(acc, path_index, vecs)
            X += acc
        X -= comp[None, :]
    return X


def _sample_stable_chunk(model, x, t, rng, n, shared) -> np.ndarray:
    E_dt, chol_dt, n_steps, gammas, shifts, dirs, alpha = shared
    d = model.d
    K = dirs.shape[0]
    X = np.tile(np.asarray(x, dtype=float), (n, 1))
    for _ in range(n_steps):
        X = X @ E_dt.T + rng.standard_normal((n, d)) @ chol_dt.T
        Z = np.empty((n, K))
        for k in range(K):
            U = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=n)
            W = rng.standard_exponential(n)
            Z[:, k] = _kernels.cms_standard_skewed(alpha, U, W)
        X += _kernels.combine_stable_atoms(Z, gammas, shifts, dirs)
    return X


def sample_transition(model: levy.OuModel, x, t: float,
                      cfg: SamplerConfig) -> np.ndarray:
    """Samples of the state at time t started from x, shape (N, d).

    Exact for finite-activity jump parts; Euler-with-exact-increments for
    stable jump parts.  Deterministic given (model, x, t, cfg, backend).
    """
    t = float(t)
    if t <= 0:
        raise ValueError("time must be positive")
    x = np.asarray(x, dtype=float).reshape(model.d)
    pi = model.pi

    if isinstance(pi, levy.AlphaStableJumps):
        dt_target = cfg.time_step if cfg.time_step is not None else t / 1024.0
        n_steps = max(1, int(math.ceil(t / dt_target - 1e-12)))
        dt = t / n_steps
        E_dt = matops.expm(model.B, dt)
        chol_dt = matops._sym_sqrt(matops.gram_qt(model.Q, model.B, dt))
        alpha = pi.alpha
        Ca = stable_tail_constant(alpha)
        gammas = (alpha * pi.weights * dt * Ca) ** (1.0 / alpha)
        shifts = dt * pi.weights * alpha / (alpha - 1.0)
        shared = (E_dt, chol_dt, n_steps, gammas, shifts,
                  pi.directions, alpha)
        sampler = _sample_stable_chunk
    else:
        Et = matops.expm(model.B, t)
        chol = matops._sym_sqrt(matops.gram_qt(model.Q, model.B, t))
        m1_in = levy.jump_mean_inside_unit_ball(pi, model.d)
        comp = np.linalg.solve(model.B, (Et - np.eye(model.d)) @ m1_in)
        cloud = None if isinstance(pi, levy.NullJumps) else _atom_cloud(pi)
        prop = _propagators(model) if cloud is not None else None
        shared = (Et, chol, comp, cloud, prop)
        sampler = _sample_exact_chunk

    N = cfg.sample_count
    out = np.empty((N, model.d))
    for chunk, start in enumerate(range(0, N, CHUNK_SIZE)):
        n = min(CHUNK_SIZE, N - start)
        rng = _chunk_rng(cfg.seed, chunk)
        out[start:start + n] = sampler(model, x, t, rng, n, shared)
    return out


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def empirical_cf(samples: np.ndarray, xi):
    """(1/N) sum_j exp(i <xi, X_j>); vectorized over rows of xi."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim == 1
    xi2 = np.atleast_2d(xi_arr)
    sums = _kernels.empirical_cf_sum(X, np.ascontiguousarray(xi2))
    vals = sums / X.shape[0]
    return complex(vals[0]) if single else vals


def mc_semigroup_apply(model: levy.OuModel, t: float, f, x,
                       cfg: SamplerConfig):
    """(estimate, stderr) of E[f(X_t) | X_0 = x] by plain Monte Carlo."""
    samples = sample_transition(model, x, t, cfg)
    vals = np.asarray(f(samples), dtype=float).reshape(samples.shape[0])
    est = float(np.mean(vals))
    if vals.shape[0] > 1:
        err = float(np.std(vals, ddof=1) / math.sqrt(vals.shape[0]))
    else:
        err = float("inf")
    return est, err


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_samples(path, samples: np.ndarray, meta: dict) -> None:
    """CSV rows "x1,...,xd" plus a JSON sidecar <path>.meta.json.

    `meta` should carry {seed, N, t, model} identification; it is written
    with sorted keys so repeated runs are byte-identical.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    d = samples.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(d)])
        for row in samples:
            writer.writerow([f"{v:.17g}" for v in row])
    with open(f"{path}.meta.json", "w") as fh:
        fh.write(_jsonfmt.dumps(meta, sort_keys=True))
