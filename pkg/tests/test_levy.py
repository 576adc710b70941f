"""Exponent evaluators and jump-measure diagnostics.

Oracles, frozen before the assertions were written:

* the radial jump integral of the 3/2-stable measure, computed by adaptive
  quadrature with Fourier-weighted tails (QUADPACK QAWF);
* the stationary jump exponent of the compensated-unit-atom model, equal to
  the integral of (e^{i u xi} - 1 - i u xi)/u over u in (0, 1], computed by
  adaptive quadrature;
* hand-computed cumulants of the compensated-atom stationary law.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import levyou as lv

# quadrature oracle for the symmetric 3/2-stable exponent (two unit
# directions, spherical weight 1/2 each); xi -> value
STABLE_SYM_ORACLE = {
    0.5: -8.8622692415496007e-01,
    1.0: -2.5066282748186044e+00,
    2.0: -7.0898154042826107e+00,
    5.0: -2.8024956125999033e+01,
}

# same oracle for a single direction (+1, weight 1): xi -> (re, im)
STABLE_ONE_SIDED_ORACLE = {
    1.0: (-2.5066282748186044e+00, 4.9337172541024088e-01),
    3.0: (-1.3024822584436691e+01, -4.0248225820830266e+00),
}

# stationary jump exponent of the unit-atom model (rate 1, drift -x):
# xi -> (re, im)
CP_STATIONARY_JUMP_ORACLE = {
    0.5: (-6.185256314820061e-02, -6.892581956933310e-03),
    1.0: (-2.398117420005648e-01, -5.391692963281699e-02),
    2.0: (-8.473820166866131e-01, -3.945870231973052e-01),
    4.0: (-2.104491723908354e+00, -2.241796861050947e+00),
}


# ---------------------------------------------------------------------------
# jump exponent phi
# ---------------------------------------------------------------------------

def test_phi_finite_atoms_hand_formula():
    pi = lv.FiniteAtomicJumps([[0.5], [2.0]], [1.0, 3.0])
    for xi in (0.3, 1.0, 2.5):
        # atom at 0.5 is compensated (inside the unit ball), atom at 2 is not
        expect = (1.0 * (np.exp(1j * 0.5 * xi) - 1.0 - 1j * 0.5 * xi)
                  + 3.0 * (np.exp(1j * 2.0 * xi) - 1.0))
        got = complex(lv.phi(pi, np.array([xi])))
        assert got == pytest.approx(expect, abs=1e-14)


def test_phi_boundary_atom_is_compensated():
    # an atom exactly on the unit sphere belongs to the compensated set
    pi = lv.FiniteAtomicJumps([[1.0]], [2.0])
    xi = 0.7
    expect = 2.0 * (np.exp(1j * xi) - 1.0 - 1j * xi)
    assert complex(lv.phi(pi, np.array([xi]))) == pytest.approx(expect,
                                                                abs=1e-14)


def test_phi_stable_symmetric_vs_quadrature_oracle():
    pi = lv.AlphaStableJumps(1.5, [[1.0], [-1.0]], [0.5, 0.5])
    for xi, expect in STABLE_SYM_ORACLE.items():
        got = complex(lv.phi(pi, np.array([xi])))
        assert got.real == pytest.approx(expect, rel=1e-8)
        assert got.imag == pytest.approx(0.0, abs=1e-12)


def test_phi_stable_one_sided_vs_quadrature_oracle():
    pi = lv.AlphaStableJumps(1.5, [[1.0]], [1.0])
    for xi, (er, ei) in STABLE_ONE_SIDED_ORACLE.items():
        got = complex(lv.phi(pi, np.array([xi])))
        assert got.real == pytest.approx(er, rel=1e-6)
        assert got.imag == pytest.approx(ei, rel=1e-6)


def test_phi_stable_closed_form_value():
    # symmetric 3/2-stable with unit spherical mass: phi(1) = -sqrt(2 pi)
    pi = lv.AlphaStableJumps(1.5, [[1.0], [-1.0]], [0.5, 0.5])
    got = complex(lv.phi(pi, np.array([1.0])))
    assert got.real == pytest.approx(-math.sqrt(2.0 * math.pi), rel=1e-12)


# ---------------------------------------------------------------------------
# state exponents
# ---------------------------------------------------------------------------

def test_psi_assembles_gaussian_and_jump_parts(cp1d):
    xi = np.array([1.3])
    expect = (-0.5 * 1.0 * 1.3 ** 2
              + complex(lv.phi(cp1d.pi, xi)))
    assert complex(lv.psi(cp1d, xi)) == pytest.approx(expect, abs=1e-14)


def test_psi_t_gaussian_closed_form(gauss1d):
    for t in (0.2, 1.0, 5.0):
        for xi in (0.5, 2.0):
            expect = -0.5 * xi ** 2 * (1.0 - math.exp(-2.0 * t))
            got = complex(lv.psi_t(gauss1d, t, np.array([xi])))
            assert got == pytest.approx(expect, abs=1e-12)


def test_psi_inf_cp_vs_quadrature_oracle(cp1d):
    # stationary exponent = Gaussian part -xi^2/4 plus the frozen jump part
    for xi, (er, ei) in CP_STATIONARY_JUMP_ORACLE.items():
        got = complex(lv.psi_inf(cp1d, np.array([xi])))
        expect = -0.25 * xi ** 2 + (er + 1j * ei)
        assert got == pytest.approx(expect, abs=1e-12)


def test_psi_t_converges_to_psi_inf(cp1d):
    xi = np.array([1.5])
    late = complex(lv.psi_t(cp1d, 40.0, xi))
    assert late == pytest.approx(complex(lv.psi_inf(cp1d, xi)), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-8.0, 8.0), s=st.floats(0.05, 2.0), t=st.floats(0.05, 2.0))
def test_flow_identity_property(xi, s, t):
    model = lv.OuModel([[1.0]], [[-1.0]],
                       lv.FiniteAtomicJumps([[1.0]], [1.0]))
    v = np.array([xi])
    whole = complex(lv.psi_t(model, s + t, v))
    split = (complex(lv.psi_t(model, t, v))
             + complex(lv.psi_t(model, s, lv.expm(model.B, t).T @ v)))
    assert whole == pytest.approx(split, abs=1e-9 * (1.0 + abs(whole)))


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(-20.0, 20.0))
def test_hermitian_symmetry_property(xi):
    model = lv.OuModel([[1.0]], [[-1.0]],
                       lv.FiniteAtomicJumps([[1.0]], [1.0]))
    v = np.array([xi])
    for f in (lambda u: lv.psi(model, u),
              lambda u: lv.psi_t(model, 0.7, u),
              lambda u: lv.psi_inf(model, u)):
        assert complex(f(-v)) == pytest.approx(
            complex(f(v)).conjugate(), abs=1e-12 * (1 + abs(complex(f(v)))))


def test_real_part_never_positive(stable1d):
    xi = np.linspace(-30.0, 30.0, 301).reshape(-1, 1)
    for t in (0.5, 3.0):
        vals = lv.psi_t(stable1d, t, xi)
        assert float(np.max(vals.real)) <= 1e-12


# ---------------------------------------------------------------------------
# cumulants of the stationary law
# ---------------------------------------------------------------------------

def test_cumulants_cp_frozen(cp1d):
    # Gaussian part adds 1/2 to the variance; the discounted unit atom
    # contributes 1/m to the m-th cumulant for m >= 2 and nothing to the
    # mean (the atom is compensated).
    table = lv.cumulants_mu(cp1d, 4)
    assert table[(1,)] == pytest.approx(0.0, abs=1e-13)
    assert table[(2,)] == pytest.approx(1.0, abs=1e-13)
    assert table[(3,)] == pytest.approx(1.0 / 3.0, abs=1e-13)
    assert table[(4,)] == pytest.approx(0.25, abs=1e-13)


def test_cumulants_match_exponent_derivatives(cp1d):
    # the stationary exponent is sum_m kappa_m (i xi)^m / m!; recover the
    # low cumulants by fitting its Taylor coefficients near zero
    h = 0.05
    pts = np.arange(-6, 7) * h
    vals = np.array([complex(lv.psi_inf(cp1d, np.array([p]))) for p in pts])
    coef = np.polynomial.polynomial.polyfit(pts, vals, 8)
    for m, expect in ((1, 0.0), (2, 1.0), (3, 1.0 / 3.0), (4, 0.25)):
        km = (coef[m] * math.factorial(m) / 1j ** m).real
        assert km == pytest.approx(expect, abs=1e-6)


def test_cumulants_gaussian_model(kinetic):
    table = lv.cumulants_mu(kinetic, 4)
    assert table[(2, 0)] == pytest.approx(1.0, abs=1e-12)
    assert table[(0, 2)] == pytest.approx(16.0 / 3.0, abs=1e-12)
    assert table[(1, 1)] == pytest.approx(0.0, abs=1e-12)
    # no cumulants beyond order 2 for a purely Gaussian law
    assert table[(3, 0)] == pytest.approx(0.0, abs=1e-12)
    assert table[(2, 2)] == pytest.approx(0.0, abs=1e-12)


def test_stationary_jump_moments_cp(cp1d):
    # discounted atom: integral of e^{-m s} ds = 1/m per unit rate
    assert lv.pi_inf_moment(cp1d, (2,)) == pytest.approx(0.5, abs=1e-13)
    assert lv.pi_inf_moment(cp1d, (4,)) == pytest.approx(0.25, abs=1e-13)


def test_cumulants_diverge_for_stable(stable1d):
    with pytest.raises(lv.errors.DivergentMoment):
        lv.cumulants_mu(stable1d, 4)


# ---------------------------------------------------------------------------
# jump-measure diagnostics
# ---------------------------------------------------------------------------

def test_measure_diagnostics_bounded_atoms(cp1d):
    diag = lv.measure_diagnostics(cp1d.pi, n_max=6, kappa_grid=(0.5, 1.0))
    assert all(diag.poly_moment.values())
    assert all(diag.exp_moment.values())


def test_measure_diagnostics_stable_tails(stable1d):
    diag = lv.measure_diagnostics(stable1d.pi, n_max=6, kappa_grid=(0.5,))
    # index-3/2 tails: first moment finite, higher ones diverge
    assert diag.poly_moment[1]
    assert not diag.poly_moment[2]
    assert not diag.poly_moment[4]
    assert not any(diag.exp_moment.values())


def test_model_validation_rejects_unstable_drift():
    with pytest.raises(lv.errors.UnstableDrift):
        lv.OuModel([[1.0]], [[0.5]], lv.NullJumps())
