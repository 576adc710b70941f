"""Eigenvalue lattice, multiplicities, kernel identities, compactness.

Oracles: hand-counted lattice representations for the frozen drifts, the
exact Jordan-cell multiplicity pattern, and the exact Gaussian transition
density for the kernel identities.
"""

import math

import numpy as np
import pytest

import levyou as lv
from levyou.errors import CutoffTooSmall


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------

def test_lattice_kinetic_hand_counts(kinetic):
    # rates (1/4, 3/4): the number of (n1, n2) with n1 + 3 n2 = m is
    # floor(m/3) + 1
    rep = lv.lattice((0.25, 0.75), cutoff=1.75)
    by_theta = {round(e["theta"] * 4): e["multiplicity"]
                for e in rep.to_jsonable()["lattice"]}
    for m in range(8):
        assert by_theta[m] == m // 3 + 1


def test_lattice_rejects_nonpositive_rates():
    with pytest.raises(ValueError):
        lv.lattice((0.5, -1.0), cutoff=2.0)


# ---------------------------------------------------------------------------
# multiplicities
# ---------------------------------------------------------------------------

def test_multiplicities_diagonal_drift():
    B = np.diag([-1.0, -2.0])
    # theta = -3 comes from (3,0) and (1,1)
    assert lv.multiplicities(B, -3.0, 6) == (2, 2, 1)
    assert lv.multiplicities(B, -1.0, 6) == (1, 1, 1)
    assert lv.multiplicities(B, -4.0, 6) == (3, 3, 1)


def test_multiplicities_jordan_cell():
    # a single 2x2 Jordan cell at -1: degree k contributes one chain of
    # length k + 1 at theta = -k
    B = np.array([[-1.0, 1.0], [0.0, -1.0]])
    for k in range(1, 6):
        assert lv.multiplicities(B, -float(k), 8) == (k + 1, 1, k + 1)


def test_multiplicities_kinetic_sequence(kinetic):
    # rates (1/4, 3/4), diagonalizable: Ma = Mg = floor(m/3) + 1 at
    # theta = -m/4, index 1 throughout
    for m in range(1, 8):
        expect = m // 3 + 1
        assert lv.multiplicities(kinetic.B, -0.25 * m, 8) == (expect, expect, 1)


def test_multiplicities_cutoff_guard():
    B = np.diag([-1.0, -2.0])
    with pytest.raises(CutoffTooSmall):
        lv.multiplicities(B, -6.0, 3)


def test_drift_operator_eigenvalues(kinetic):
    for k in (2, 4):
        mat = lv.spectrum.drift_operator_matrix(kinetic.B, k)
        got = np.sort(np.linalg.eigvals(mat).real)
        lattice_vals = sorted(-(0.25 * n1 + 0.75 * n2)
                              for n1 in range(k + 1)
                              for n2 in range(k + 1) if n1 + n2 == k)
        assert np.allclose(got, lattice_vals, atol=1e-9)


def test_isospectrality_all_polynomial_models(gauss1d, cp1d, kinetic):
    for model in (gauss1d, cp1d, kinetic):
        assert lv.isospectrality_check(model, 6)


def test_spectral_report_shape(kinetic):
    doc = lv.spectral_report(kinetic, 4).to_jsonable()
    assert set(doc) == {"lattice", "eigenvalues"}
    entry = doc["lattice"][1]
    assert set(entry) == {"theta", "multiplicity", "reps"}
    assert entry["theta"] == pytest.approx(0.25)
    assert entry["reps"] == [[1, 0]]
    eig = doc["eigenvalues"][1]
    assert set(eig) == {"theta", "Ma", "Mg", "index"}
    assert eig["theta"] == pytest.approx(-0.25)
    assert (eig["Ma"], eig["Mg"], eig["index"]) == (1, 1, 1)


# ---------------------------------------------------------------------------
# truncated expansion
# ---------------------------------------------------------------------------

def test_spectral_apply_reproduces_semigroup(kinetic, rng):
    p = lv.polyspec.Poly(2, {
        m: rng.standard_normal()
        for k in range(4) for m in lv.levy._multi_indices(2, k)})
    for t in (0.1, 1.0, 10.0):
        via = lv.spectral_apply(kinetic, t, p, 3)
        direct = lv.poly_semigroup_apply(kinetic, p, t)
        assert via.coeff_distance(direct) < 1e-9


def test_expansion_threshold_finite(gauss1d):
    grid = lv.default_grid(gauss1d)
    t0 = lv.estimate_expansion_threshold(gauss1d, grid, N=12)
    assert 0.0 < t0 < 10.0


# ---------------------------------------------------------------------------
# kernel identities
# ---------------------------------------------------------------------------

def test_mehler_series_converges_to_closed_form(gauss1d):
    x, y = np.array([0.3]), np.array([0.4])
    gaps = []
    for N in (8, 16, 24):
        series, closed = lv.mehler_kernel(gauss1d, 1.0, x, y, N)
        gaps.append(abs(series - closed))
    assert gaps[1] < gaps[0] and gaps[2] < 1e-11


def test_mehler_times_density_is_transition(gauss1d):
    t = 0.8
    for xv, yv in ((0.0, 0.5), (-0.7, 0.2), (1.0, -1.0)):
        x, y = np.array([xv]), np.array([yv])
        _, closed = lv.mehler_kernel(gauss1d, t, x, y, 4)
        mu_y = math.exp(-0.5 * yv * yv) / math.sqrt(2.0 * math.pi)
        exact = lv.gaussian_transition_value(gauss1d, t, x, y)
        assert closed * mu_y == pytest.approx(exact, rel=1e-12)


def test_mehler_kernel_2d(kinetic):
    # the slow relaxation rate is 1/4, so the truncation error shrinks by
    # roughly e^{-t/4} per extra order; t=6 makes N=18 converge to ~1e-8
    x = np.array([0.5, -0.3])
    y = np.array([0.1, 0.4])
    gaps = []
    for N in (10, 14, 18):
        series, closed = lv.mehler_kernel(kinetic, 6.0, x, y, N)
        gaps.append(abs(series - closed))
    assert gaps[2] < gaps[1] < gaps[0]
    assert gaps[2] < 1e-7


def test_mehler_rejects_jump_models(cp1d):
    with pytest.raises(ValueError):
        lv.mehler_kernel(cp1d, 1.0, np.array([0.0]), np.array([0.0]), 4)


# ---------------------------------------------------------------------------
# compactness diagnostics
# ---------------------------------------------------------------------------

def test_compactness_stable_fails_necessity(stable1d, stable_grid):
    rep = lv.compactness_diagnostic(stable1d, stable_grid)
    assert rep.verdict == "NonCompactNecessaryFail"
    assert rep.evidence["failing_moment_order"] == 2


def test_compactness_bounded_jumps_sufficient(cp1d, cp_grid):
    rep = lv.compactness_diagnostic(cp1d, cp_grid)
    assert rep.verdict == "CompactSufficient"


def test_compactness_gaussian_sufficient(gauss1d):
    rep = lv.compactness_diagnostic(gauss1d, lv.default_grid(gauss1d))
    assert rep.verdict == "CompactSufficient"
