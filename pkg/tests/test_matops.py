"""Matrix plumbing: exponentials, covariance integrals, controllability.

Oracles: scipy.linalg.expm for the matrix exponential, scipy quadrature for
the time-integrated covariance, scipy's Lyapunov solver for its limit, plus
hand-frozen small instances.
"""

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

import levyou as lv
from levyou.errors import HypoellipticityFailure, UnstableDrift


def _random_stable_pair(rng, d):
    B = rng.standard_normal((d, d))
    B -= (lv.spectral_abscissa(B) + 0.5 + rng.uniform(0.2)) * np.eye(d)
    r = rng.integers(1, d + 1)
    G = rng.standard_normal((d, r))
    return G @ G.T, B


# ---------------------------------------------------------------------------
# matrix exponential
# ---------------------------------------------------------------------------

def test_expm_matches_scipy(rng):
    for _ in range(20):
        d = rng.integers(1, 5)
        B = rng.standard_normal((d, d))
        t = rng.uniform(0.1, 3.0)
        assert np.allclose(lv.expm(B, t), scipy.linalg.expm(t * B),
                           rtol=1e-12, atol=1e-12)


def test_expm_identity_at_zero():
    B = np.array([[-1.0, 2.0], [0.5, -3.0]])
    assert np.array_equal(lv.expm(B, 0.0), np.eye(2))


# ---------------------------------------------------------------------------
# time-integrated covariance
# ---------------------------------------------------------------------------

def test_gram_qt_matches_quadrature_oracle(rng):
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    B = np.array([[-1.0, 0.3], [0.0, -2.0]])
    for t in (0.25, 1.0, 4.0):
        oracle, _ = scipy.integrate.quad_vec(
            lambda s: scipy.linalg.expm(s * B) @ Q @ scipy.linalg.expm(s * B).T,
            0.0, t, epsabs=1e-13, epsrel=1e-13)
        assert np.max(np.abs(lv.gram_qt(Q, B, t) - oracle)) < 1e-11


def test_gram_qt_scalar_closed_form():
    # d = 1, Q = 2, B = -1: integral of 2 e^{-2s} over [0, t] = 1 - e^{-2t}.
    for t in (0.1, 1.0, 10.0):
        got = float(lv.gram_qt(np.array([[2.0]]), np.array([[-1.0]]), t)[0, 0])
        assert got == pytest.approx(1.0 - np.exp(-2.0 * t), abs=1e-13)


def test_gram_qt_difference_identity(rng):
    for _ in range(10):
        d = int(rng.integers(1, 5))
        Q, B = _random_stable_pair(rng, d)
        Qinf = lv.qinf(Q, B)
        for t in (0.3, 2.0):
            E = lv.expm(B, t)
            assert np.max(np.abs(lv.gram_qt(Q, B, t)
                                 - (Qinf - E @ Qinf @ E.T))) < 1e-10


# ---------------------------------------------------------------------------
# stationary covariance
# ---------------------------------------------------------------------------

def test_qinf_matches_scipy_lyapunov(rng):
    for _ in range(10):
        d = int(rng.integers(1, 5))
        Q, B = _random_stable_pair(rng, d)
        oracle = scipy.linalg.solve_continuous_lyapunov(B, -Q)
        assert np.max(np.abs(lv.qinf(Q, B) - oracle)) < 1e-10


def test_qinf_kinetic_frozen(kinetic):
    # Hand-solved stationary covariance of the 2-d hypoelliptic model.
    assert np.allclose(kinetic.Q_inf, np.diag([1.0, 16.0 / 3.0]),
                       rtol=0, atol=1e-12)


def test_qinf_rejects_unstable_drift():
    with pytest.raises(UnstableDrift):
        lv.qinf(np.eye(2), np.diag([-1.0, 0.5]))


# ---------------------------------------------------------------------------
# controllability index
# ---------------------------------------------------------------------------

def test_kalman_index_full_rank_noise(gauss1d):
    assert lv.kalman_index(gauss1d.Q, gauss1d.B) == 0


def test_kalman_index_degenerate_noise(kinetic):
    # Noise enters only the first coordinate; one drift bracket fills d = 2.
    assert lv.kalman_index(kinetic.Q, kinetic.B) == 1


def test_kalman_index_uncontrollable_raises():
    with pytest.raises(HypoellipticityFailure):
        lv.kalman_index(np.diag([1.0, 0.0]), np.diag([-1.0, -2.0]))


def test_kalman_index_scale_invariant(kinetic):
    for c in (1e-6, 1.0, 1e6):
        assert lv.kalman_index(c * kinetic.Q, kinetic.B) == 1


# ---------------------------------------------------------------------------
# spectral data of the drift
# ---------------------------------------------------------------------------

def test_spectral_abscissa_frozen():
    assert lv.spectral_abscissa(np.diag([-1.0, -2.0])) == pytest.approx(-1.0)
    assert lv.spectral_abscissa(
        np.array([[-1.0, 0.1875], [-1.0, 0.0]])) == pytest.approx(-0.25)


def test_spectral_data_kinetic(kinetic):
    sd = lv.spectral_data(kinetic.B)
    assert sd.diagonalizable
    assert np.allclose(sorted(sd.decay_rates), [0.25, 0.75], atol=1e-12)


def test_spectral_data_defective_flagged():
    sd = lv.spectral_data(np.array([[-1.0, 1.0], [0.0, -1.0]]))
    assert not sd.diagonalizable
