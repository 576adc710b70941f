"""Matrix infrastructure for stable linear drifts.

Provides the matrix exponential, the finite-horizon Gramian

    Q_t = int_0^t e^{sB} Q e^{sB^T} ds,

its stationary limit via a Lyapunov solve, the controllability (hypoellipticity)
index, and the spectral data of the drift needed by the polynomial spectral
calculus: decay rates, the diagonalizing change of basis, and the Hermite
length scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._quad import panel_integrate
from .errors import HypoellipticityFailure, UnstableDrift

__all__ = [
    "expm",
    "expm_batch",
    "gram_qt",
    "qinf",
    "kalman_index",
    "SpectralData",
    "spectral_data",
    "spectral_abscissa",
]

RANK_RTOL = 1e-10


def expm(B, t=1.0):
    """e^{tB} by scaling-and-squaring with a degree-13 Pade approximant."""
    B = np.asarray(B, dtype=float)
    return sla.expm(float(t) * B)


def expm_batch(B, ts):
    """e^{t_k B} for every t_k in `ts`, stacked along the first axis."""
    B = np.asarray(B, dtype=float)
    ts = np.asarray(ts, dtype=float)
    return sla.expm(ts[:, None, None] * B)


def spectral_abscissa(B) -> float:
    """Largest real part of the eigenvalues of B."""
    return float(np.max(np.linalg.eigvals(np.asarray(B, dtype=float)).real))


def gram_qt(Q, B, t, tol=1e-12):
    """Finite-horizon Gramian int_0^t e^{sB} Q e^{sB^T} ds.

    Panel Gauss-Legendre quadrature with doubling refinement until two
    successive results agree to `tol` in max-norm.  The result is symmetrized.
    Raises NonConvergedQuadrature if refinement stalls.
    """
    Q = np.asarray(Q, dtype=float)
    B = np.asarray(B, dtype=float)
    t = float(t)
    if t < 0:
        raise ValueError("gram_qt requires t >= 0")
    if t == 0.0:
        return np.zeros_like(Q)

    norm_b = np.linalg.norm(B, 2)
    initial = int(min(256, max(4, np.ceil(t * max(1.0, norm_b) / 2.0))))

    def integrand(nodes):
        E = expm_batch(B, nodes)
        return E @ Q @ np.swapaxes(E, 1, 2)

    out = panel_integrate(integrand, 0.0, t, tol=tol, initial_panels=initial)
    return 0.5 * (out + out.T)


def qinf(Q, B):
    """Stationary Gramian: the unique solution X of B X + X B^T = -Q.

    Requires the drift to be stable (spectral abscissa < 0); raises
    UnstableDrift otherwise.  The output is symmetrized and positive
    semidefinite for PSD input.
    """
    Q = np.asarray(Q, dtype=float)
    B = np.asarray(B, dtype=float)
    if spectral_abscissa(B) >= 0:
        raise UnstableDrift(
            f"spectral abscissa {spectral_abscissa(B):.6g} >= 0; "
            "no stationary Gramian exists"
        )
    X = sla.solve_continuous_lyapunov(B, -Q)
    return 0.5 * (X + X.T)


def _sym_sqrt(Q):
    """Symmetric PSD square root, small negative eigenvalues clipped to 0."""
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def kalman_index(Q, B):
    """Smallest n with rank [Q^{1/2}, B Q^{1/2}, ..., B^n Q^{1/2}] = d.

    Numerical rank uses a singular-value threshold relative to the largest
    singular value.  Raises HypoellipticityFailure when the rank never reaches
    d for n up to d-1 (by Cayley-Hamilton it then never will).
    """
    Q = np.asarray(Q, dtype=float)
    B = np.asarray(B, dtype=float)
    d = Q.shape[0]
    S = _sym_sqrt(Q)
    block = S
    blocks = [block]
    for n in range(d):
        K = np.hstack(blocks)
        if np.linalg.matrix_rank(K, rtol=RANK_RTOL) == d:
            return n
        block = B @ block
        blocks.append(block)
    raise HypoellipticityFailure(
        f"controllability rank stuck below d={d} for all orders up to {d - 1}"
    )


@dataclass(frozen=True)
class SpectralData:
    """Spectral description of a drift matrix.

    Fields that require a stable, real-diagonalizable drift (and, for the
    scale fields, a stationary Gramian) are None when they do not apply.

    Attributes
    ----------
    spectral_abscissa : float
        max Re(eig(B)); stability means < 0.
    stable : bool
    real_spectrum : bool
    diagonalizable : bool
    decay_rates : ndarray | None
        Positive rates lambda, ascending; the eigenvalues of B are their
        negatives.  Present for stable real-diagonalizable drifts.
    to_eigenbasis : ndarray | None
        Matrix whose rows are left eigenvectors of B: in the coordinates
        u = to_eigenbasis @ x the drift acts as diag(-decay_rates).
    from_eigenbasis : ndarray | None
        Inverse of `to_eigenbasis`; its columns are the unit-norm right
        eigenvectors of B (sign-fixed so the largest component is positive).
    min_eigencoord_variance : float | None
        Smallest eigenvalue of to_eigenbasis @ Q_inf @ to_eigenbasis^T: the
        smallest stationary variance across eigen-coordinates.
    hermite_scale : float | None
        Square root of the above; the common length scale of the orthonormal
        Hermite system used by the polynomial spectral calculus.
    rate_variance_product : float | None
        decay_rates[0] * min_eigencoord_variance; the normalization constant
        pairing the slowest rate with the smallest eigen-coordinate variance.
    """

    spectral_abscissa: float
    stable: bool
    real_spectrum: bool
    diagonalizable: bool
    decay_rates: np.ndarray | None = None
    to_eigenbasis: np.ndarray | None = None
    from_eigenbasis: np.ndarray | None = None
    min_eigencoord_variance: float | None = None
    hermite_scale: float | None = None
    rate_variance_product: float | None = None


def _cluster(values, tol):
    """Group a 1-d complex array into clusters of diameter <= tol (greedy)."""
    order = np.lexsort((values.imag, values.real))
    groups: list[list[int]] = []
    for idx in order:
        placed = False
        for g in groups:
            if abs(values[idx] - values[g[0]]) <= tol:
                g.append(idx)
                placed = True
                break
        if not placed:
            groups.append([idx])
    return groups


def spectral_data(B, Q_inf=None) -> SpectralData:
    """Eigen-structure of the drift plus the Hermite normalization data.

    Diagonalizability is decided by comparing, for every distinct eigenvalue
    theta, the algebraic multiplicity (cluster size) with the geometric one
    (d - rank(B - theta I)).  When the drift is stable with real spectrum and
    diagonalizable, the decay rates are returned ascending (the eigenvalue
    closest to zero first) together with the diagonalizing basis; if `Q_inf`
    is supplied and positive definite in eigen-coordinates, the Hermite scale
    fields are filled in as well.
    """
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    evals, evecs = np.linalg.eig(B)
    abscissa = float(np.max(evals.real))
    stable = abscissa < 0
    scale = 1.0 + np.max(np.abs(evals))
    real_spectrum = bool(np.all(np.abs(evals.imag) <= 1e-10 * scale))

    diagonalizable = True
    for group in _cluster(evals, 1e-8 * scale):
        alg = len(group)
        if alg == 1:
            continue
        theta = np.mean(evals[group])
        geo = d - np.linalg.matrix_rank(B - theta * np.eye(d), rtol=RANK_RTOL)
        if geo < alg:
            diagonalizable = False
            break

    data = SpectralData(
        spectral_abscissa=abscissa,
        stable=stable,
        real_spectrum=real_spectrum,
        diagonalizable=diagonalizable,
    )
    if not (stable and real_spectrum and diagonalizable):
        return data

    order = np.argsort(-evals.real)
    rates = -evals.real[order]
    P = evecs[:, order].real.copy()
    for j in range(d):
        v = P[:, j]
        v = v / np.linalg.norm(v)
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        P[:, j] = v
    M = np.linalg.inv(P)

    extra: dict = {
        "decay_rates": rates,
        "to_eigenbasis": M,
        "from_eigenbasis": P,
    }
    if Q_inf is not None:
        C = M @ np.asarray(Q_inf, dtype=float) @ M.T
        s2 = float(np.min(np.linalg.eigvalsh(0.5 * (C + C.T))))
        if s2 > 0:
            extra["min_eigencoord_variance"] = s2
            extra["hermite_scale"] = float(np.sqrt(s2))
            extra["rate_variance_product"] = float(rates[0] * s2)
    return SpectralData(
        spectral_abscissa=abscissa,
        stable=stable,
        real_spectrum=real_spectrum,
        diagonalizable=diagonalizable,
        **extra,
    )
