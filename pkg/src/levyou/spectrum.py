"""Eigenvalue lattice, multiplicities, spectral expansion, Mehler kernel,
and compactness diagnostics for Levy-driven OU semigroups.

The point spectrum of the generator on polynomials is the lattice
{ -<n, lambda> : n in N^d } built from the drift decay rates.  Multiplicities
are computed two independent ways: from the pure drift operator
L = <Bx, grad> restricted to homogeneous-degree blocks, and from the full
generator acting on polynomials.  The truncated spectral expansion and the
Gaussian Mehler kernel give pointwise reconstructions of the Markov operator,
and the compactness diagnostic classifies models by tail behaviour of the jump
measure and growth of the invariant potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import density as density_mod
from . import levy, matops, polyspec
from .errors import (
    CutoffTooLarge,
    CutoffTooSmall,
    GridTooCoarse,
    NotDiagonalizable,
)

__all__ = [
    "LatticeEntry",
    "EigenvalueEntry",
    "SpectralReport",
    "lattice",
    "drift_operator_matrix",
    "multiplicities",
    "isospectrality_check",
    "spectral_report",
    "spectral_apply",
    "mehler_kernel",
    "gaussian_transition_value",
    "CompactnessReport",
    "compactness_diagnostic",
    "estimate_expansion_threshold",
]

LATTICE_LIMIT = 10 ** 6
COMPACT_SUFFICIENT = "CompactSufficient"
NONCOMPACT_NECESSARY_FAIL = "NonCompactNecessaryFail"
INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeEntry:
    theta: float                 # nonnegative lattice value <n, rates>
    multiplicity: int
    representatives: tuple       # multi-indices achieving it


@dataclass(frozen=True)
class EigenvalueEntry:
    theta: float                 # operator eigenvalue (= -lattice value)
    algebraic: int
    geometric: int
    index: int


@dataclass(frozen=True)
class SpectralReport:
    lattice: tuple
    per_eigenvalue: tuple = ()
    diagonalizable_equivalence: bool | None = None

    def to_jsonable(self) -> dict:
        return {
            "lattice": [
                {"theta": e.theta, "multiplicity": e.multiplicity,
                 "reps": [list(r) for r in e.representatives]}
                for e in self.lattice
            ],
            "eigenvalues": [
                {"theta": e.theta, "Ma": e.algebraic, "Mg": e.geometric,
                 "index": e.index}
                for e in self.per_eigenvalue
            ],
        }


def _enumerate_lattice(rates: np.ndarray, cutoff: float):
    """All (value, multi-index) with <n, rates> <= cutoff; CutoffTooLarge
    beyond 10^6 indices."""
    d = rates.shape[0]
    out = []

    def walk(j: int, prefix: tuple, acc: float):
        if j == d:
            out.append((acc, prefix))
            if len(out) > LATTICE_LIMIT:
                raise CutoffTooLarge(
                    f"lattice enumeration exceeds {LATTICE_LIMIT} indices"
                )
            return
        k = 0
        while acc + k * rates[j] <= cutoff + 1e-15:
            walk(j + 1, prefix + (k,), acc + k * rates[j])
            k += 1

    walk(0, (), 0.0)
    return out


def lattice(rates, cutoff: float) -> SpectralReport:
    """Lattice part of the spectral report: the values {<n, rates> <= cutoff}
    grouped within 1e-9*(1+cutoff), with combinatorial multiplicities."""
    rates = np.asarray(rates, dtype=float)
    if np.any(rates <= 0):
        raise ValueError("decay rates must be positive")
    cutoff = float(cutoff)
    pairs = _enumerate_lattice(rates, cutoff)
    pairs.sort(key=lambda p: (p[0], p[1]))
    tol = 1e-9 * (1.0 + cutoff)
    entries = []
    group_vals: list = []
    group_reps: list = []

    def flush():
        if group_vals:
            entries.append(LatticeEntry(
                theta=float(np.mean(group_vals)),
                multiplicity=len(group_reps),
                representatives=tuple(group_reps),
            ))

    for val, rep in pairs:
        if group_vals and val - group_vals[-1] > tol:
            flush()
            group_vals, group_reps = [], []
        group_vals.append(val)
        group_reps.append(rep)
    flush()
    return SpectralReport(lattice=tuple(entries))


# ---------------------------------------------------------------------------
# drift operator and multiplicities
# ---------------------------------------------------------------------------

def _graded_basis(d: int, k_max: int):
    return [m for k in range(k_max + 1) for m in levy._multi_indices(d, k)]


def drift_operator_matrix(B, k: int) -> np.ndarray:
    """Matrix of L = <Bx, grad> on homogeneous monomials of degree k.

    L x^n = sum_{j,l} B_{jl} n_j x^{n - e_j + e_l}, so L preserves the
    homogeneous degree; rows and columns are indexed by the degree-k
    multi-indices in graded enumeration order.
    """
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    basis = list(levy._multi_indices(d, int(k)))
    index = {m: i for i, m in enumerate(basis)}
    L = np.zeros((len(basis), len(basis)))
    for col, n in enumerate(basis):
        for j in range(d):
            if n[j] == 0:
                continue
            for l in range(d):
                if B[j, l] == 0.0:
                    continue
                target = list(n)
                target[j] -= 1
                target[l] += 1
                L[index[tuple(target)], col] += B[j, l] * n[j]
    return L


SCHUR_CLUSTER_RTOL = 1e-6


def _lattice_values(B, k_max: int) -> np.ndarray:
    """All operator eigenvalues sum_j n_j eig_j(B) for |n| <= k_max,
    deduplicated (complex array)."""
    lam = np.linalg.eigvals(np.asarray(B, dtype=float))
    d = lam.shape[0]
    vals = [complex(np.dot(n, lam))
            for k in range(k_max + 1) for n in levy._multi_indices(d, k)]
    out: list = []
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        if not out or abs(v - out[-1]) > 1e-9 * (1.0 + abs(v)):
            out.append(v)
    return np.asarray(out)


def _kernel_dimensions(Mat: np.ndarray, theta, candidates: np.ndarray):
    """dim ker (Mat - theta I)^r for r = 1, 2, ... until stabilization,
    computed on the Schur-deflated eigenvalue cluster at theta.

    Eigenvalues are assigned to theta by nearest-candidate matching against
    the full lattice of possible operator eigenvalues, which tolerates the
    large eigenvalue perturbations of high-degree monomial blocks (their
    eigenvector conditioning grows like a power of the drift's).  The
    restriction of the operator to the cluster's invariant subspace is
    exactly theta*I plus a nilpotent part up to backward error, so ranks are
    decided against the operator scale instead of the powered matrix norm.
    Returns the increasing kernel-dimension sequence (its length is the
    nilpotency index).
    """
    n = Mat.shape[0]
    if n == 0:
        return []
    theta = complex(theta)
    cand = np.asarray(candidates, dtype=complex)
    others = cand[np.abs(cand - theta) > 1e-9 * (1.0 + abs(theta))]

    def _is_ours(z):
        return bool(others.size == 0
                    or abs(z - theta) < np.min(np.abs(others - z)))

    T, _, sdim = scipy.linalg.schur(Mat.astype(complex), output="complex",
                                    sort=_is_ours)
    m = int(sdim)
    if m == 0:
        return []
    scale = max(1.0, float(np.linalg.norm(Mat, 2)))
    nil = (T[:m, :m] - theta * np.eye(m)) / scale
    dims = []
    power = np.eye(m, dtype=complex)
    for _ in range(m):
        power = power @ nil
        sv = np.linalg.svd(power, compute_uv=False)
        rank = int(np.sum(sv > SCHUR_CLUSTER_RTOL))
        dims.append(m - rank)
        if dims[-1] == m or (len(dims) >= 2 and dims[-1] == dims[-2]):
            break
    if len(dims) >= 2 and dims[-1] == dims[-2]:
        dims = dims[:-1]
    return dims


def _multiplicity_triple(blocks: list, theta, candidates: np.ndarray):
    """(M_a, M_g, index) of theta across a list of invariant-block matrices."""
    alg = 0
    geo = 0
    idx = 0
    for Mat in blocks:
        dims = _kernel_dimensions(Mat, theta, candidates)
        if not dims or dims[-1] == 0:
            continue
        geo += dims[0]
        alg += dims[-1]
        idx = max(idx, len(dims))
    return int(alg), int(geo), int(idx)


def multiplicities(B, theta: float, k_max: int):
    """(algebraic, geometric, index) of the operator eigenvalue theta for
    L = <Bx, grad> acting on polynomials of degree <= k_max.

    Contributions to eigenvalue theta can only come from degrees up to
    ceil(|Re theta| / |s(B)|) + 1; when k_max falls short of that bound and
    the table still changes between k_max-1 and k_max, CutoffTooSmall is
    raised rather than returning a possibly incomplete count.
    """
    B = np.asarray(B, dtype=float)
    theta = float(theta)
    k_max = int(k_max)
    absc = matops.spectral_abscissa(B)
    if absc >= 0:
        raise ValueError("drift must be stable")
    blocks = [drift_operator_matrix(B, k) for k in range(k_max + 1)]
    cand = _lattice_values(B, k_max)
    triple = _multiplicity_triple(blocks, theta, cand)
    bound = math.ceil(abs(theta) / abs(absc)) + 1
    if k_max < bound:
        prev = _multiplicity_triple(blocks[:-1], theta, cand)
        if prev != triple:
            raise CutoffTooSmall(
                f"degree cutoff {k_max} cannot resolve eigenvalue "
                f"{theta:g}: the multiplicity table is still changing and "
                f"the resolving degree bound is {bound}"
            )
    return triple


def _generator_matrix(model: levy.OuModel, k_max: int) -> np.ndarray:
    """Matrix of the exact generator action on polynomials of degree <= k_max
    (graded monomial basis; lower-triangular in total degree)."""
    d = model.d
    basis = _graded_basis(d, k_max)
    index = {m: i for i, m in enumerate(basis)}
    A = np.zeros((len(basis), len(basis)))
    for col, n in enumerate(basis):
        image = polyspec.generator_apply(model, polyspec.Poly.monomial(n))
        for m, c in image.coeffs.items():
            A[index[m], col] = c
    return A


def isospectrality_check(model: levy.OuModel, k_max: int) -> bool:
    """Whether the multiplicity tables of the full generator and of the pure
    drift operator agree for every lattice eigenvalue up to degree k_max.

    Both operators are truncated to polynomials of degree <= k_max; the jump
    and diffusion terms only lower the total degree, so both matrices are
    block-triangular with identical diagonal blocks.  The property checked is
    that algebraic AND geometric counts coincide, not just the eigenvalues.
    """
    k_max = int(k_max)
    evals = np.linalg.eigvals(model.B)
    if np.max(np.abs(evals.imag)) > 1e-10 * (1.0 + np.max(np.abs(evals))):
        raise NotDiagonalizable(
            "isospectrality comparison implemented for real drift spectra"
        )
    rates = np.sort(-evals.real)  # ascending positive rates
    A = _generator_matrix(model, k_max)
    blocks = [drift_operator_matrix(model.B, k) for k in range(k_max + 1)]
    cand = _lattice_values(model.B, k_max)
    thetas = sorted({-e.theta for e in
                     lattice(rates, float(k_max * np.max(rates))).lattice})
    for theta in thetas:
        drift_triple = _multiplicity_triple(blocks, theta, cand)
        gen_triple = _multiplicity_triple([A], theta, cand)
        if drift_triple != gen_triple:
            return False
    return True


def spectral_report(model: levy.OuModel, k_max: int) -> SpectralReport:
    """Full spectral report up to polynomial degree k_max: the lattice with
    combinatorial multiplicities, and per-eigenvalue (M_a, M_g, index) from
    the drift operator.

    Each eigenvalue's table is computed at its own resolving degree (the
    |theta|/|s(B)| bound), so every reported triple is complete even for
    eigenvalues near the top of the lattice.
    """
    sd = model.spectral
    if not sd.real_spectrum:
        raise NotDiagonalizable(
            "spectral reports are implemented for real drift spectra"
        )
    evals = np.linalg.eigvals(model.B).real
    rates = np.sort(-evals)
    absc = matops.spectral_abscissa(model.B)
    cutoff = float(k_max * np.max(rates))
    rep = lattice(rates, cutoff)
    keep = [e for e in rep.lattice
            if min(sum(r) for r in e.representatives) <= k_max]
    per = []
    equivalent = True
    for entry in keep:
        resolve = max(int(k_max),
                      math.ceil(abs(entry.theta) / abs(absc)) + 1)
        alg, geo, idx = multiplicities(model.B, -entry.theta, resolve)
        per.append(EigenvalueEntry(theta=-entry.theta, algebraic=alg,
                                   geometric=geo, index=idx))
        if alg != geo:
            equivalent = False
    return SpectralReport(lattice=tuple(keep), per_eigenvalue=tuple(per),
                          diagonalizable_equivalence=equivalent)


# ---------------------------------------------------------------------------
# spectral expansion
# ---------------------------------------------------------------------------

def _indices_box(d: int, N: int):
    return [m for k in range(N + 1) for m in levy._multi_indices(d, k)]


def spectral_apply(model: levy.OuModel, t: float, p: polyspec.Poly,
                   N: int) -> polyspec.Poly:
    """Truncated spectral expansion of the time-t operator applied to p:

        sum_{|n| <= N} e^{-t <n, rates>} <p, G_n> H_n,

    with the pairing evaluated exactly through the reference intertwiner.
    For deg(p) <= N the truncation is exact for every t and reproduces
    poly_semigroup_apply.
    """
    sd = polyspec._real_diagonal_data(model)
    t = float(t)
    V = model.cache(("V",), lambda: polyspec.build_V(model))
    Vp = polyspec.convolve_markov(V, p)
    out = polyspec.Poly.zero(model.d)
    for n in _indices_box(model.d, int(N)):
        hn = polyspec.hermite_orthonormal(n, sd.decay_rates,
                                          sd.rate_variance_product)
        coeff = polyspec.isotropic_gaussian_expectation(
            Vp * hn, sd.min_eigencoord_variance)
        if coeff == 0.0:
            continue
        Hn = polyspec.eigenfunction_Hn(model, n)
        decay = math.exp(-t * float(np.dot(n, sd.decay_rates)))
        out = out + Hn * (coeff * decay)
    return out


# ---------------------------------------------------------------------------
# Mehler kernel (purely Gaussian models)
# ---------------------------------------------------------------------------

def mehler_kernel(model: levy.OuModel, t: float, x, y, N: int):
    """Transition kernel relative to the invariant law, two ways.

    series     = sum_{|n| <= N} e^{-t <n, rates>} H_n(x) G_n(y) with the
                 co-eigenfunctions in exact polynomial form;
    closedForm = sqrt(det Q_inf / det Q_t)
                 * exp( (1/2) <Q_inf^{-1} y, y>
                        - (1/2) <Q_t^{-1} (e^{tB}x - y), e^{tB}x - y> ).

    Both equal p_t(x, y)/mu(y) for the purely Gaussian model; multiplying by
    mu(y) recovers the Gaussian transition density exactly.
    """
    if not isinstance(model.pi, levy.NullJumps):
        raise ValueError("the Mehler kernel requires a purely Gaussian model")
    sd = polyspec._real_diagonal_data(model)
    t = float(t)
    x = np.asarray(x, dtype=float).reshape(model.d)
    y = np.asarray(y, dtype=float).reshape(model.d)

    series = 0.0
    for n in _indices_box(model.d, int(N)):
        Hn = model.cache(("Hn", tuple(n)),
                         lambda n=n: polyspec.eigenfunction_Hn(model, n))
        Gn = model.cache(("Gn_poly", tuple(n)),
                         lambda n=n: polyspec.coeigenfunction_poly(model, n))
        decay = math.exp(-t * float(np.dot(n, sd.decay_rates)))
        series += decay * float(Hn(x)) * float(Gn(y))

    Qt = model.cache(("gram", t),
                     lambda: matops.gram_qt(model.Q, model.B, t))
    Qinf = model.Q_inf
    drift = matops.expm(model.B, t) @ x
    resid = drift - y
    quad_inf = float(y @ np.linalg.solve(Qinf, y))
    quad_t = float(resid @ np.linalg.solve(Qt, resid))
    det_ratio = float(np.linalg.det(Qinf) / np.linalg.det(Qt))
    closed = math.sqrt(det_ratio) * math.exp(0.5 * quad_inf - 0.5 * quad_t)
    return float(series), float(closed)


def gaussian_transition_value(model: levy.OuModel, t: float, x, y) -> float:
    """Gaussian transition density value: the N(e^{tB}x, Q_t) density at y."""
    if not isinstance(model.pi, levy.NullJumps):
        raise ValueError("closed-form transition values require no jumps")
    t = float(t)
    x = np.asarray(x, dtype=float).reshape(model.d)
    y = np.asarray(y, dtype=float).reshape(model.d)
    Qt = model.cache(("gram", t),
                     lambda: matops.gram_qt(model.Q, model.B, t))
    resid = y - matops.expm(model.B, t) @ x
    quad = float(resid @ np.linalg.solve(Qt, resid))
    norm = (2.0 * math.pi) ** (model.d / 2.0) * math.sqrt(np.linalg.det(Qt))
    return math.exp(-0.5 * quad) / norm


# ---------------------------------------------------------------------------
# compactness diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompactnessReport:
    verdict: str
    evidence: dict = field(default_factory=dict)


def compactness_diagnostic(model: levy.OuModel,
                           grid: density_mod.GridSpec) -> CompactnessReport:
    """Classify the model's compactness behaviour.

    NonCompactNecessaryFail: some polynomial moment of the jump measure
    diverges (necessity of all moments — heavy tails rule compactness out).
    CompactSufficient: the potential W = -ln(mu) has |grad W| monotonically
    increasing over the outer quarter of every axis ray, at grid resolution —
    the finite-volume surrogate of |grad W| -> infinity.  Otherwise
    Inconclusive.
    """
    diag = levy.measure_diagnostics(model.pi, n_max=8)
    failing = [n for n, ok in sorted(diag.poly_moment.items()) if not ok]
    if failing:
        return CompactnessReport(
            NONCOMPACT_NECESSARY_FAIL,
            {"failing_moment_order": failing[0],
             "checked_orders": sorted(diag.poly_moment)},
        )
    mu = density_mod.invariant_density(model, grid)
    floor = polyspec.DENSITY_FLOOR
    W = -np.log(np.clip(mu.values, floor, None))
    grads = np.gradient(W, *grid.spacings) if grid.dim > 1 else \
        [np.gradient(W, grid.spacings[0])]
    gnorm = np.sqrt(sum(g * g for g in grads))
    # A node's finite-difference gradient is trustworthy only when the node
    # and every in-bounds neighbour sit above the clipping floor; clipped
    # (constant) plateaus otherwise fake a vanishing derivative at the rim.
    above = mu.values > floor
    valid = above.copy()
    for ax in range(grid.dim):
        lo = tuple(slice(1, None) if a == ax else slice(None)
                   for a in range(grid.dim))
        hi = tuple(slice(0, -1) if a == ax else slice(None)
                   for a in range(grid.dim))
        valid[lo] &= above[hi]
        valid[hi] &= above[lo]
    center = [N // 2 for N in grid.sizes]
    rays = {}
    all_monotone = True
    for axis in range(grid.dim):
        for direction in (+1, -1):
            key = f"axis{axis}{'+' if direction > 0 else '-'}"
            idx = list(center)
            profile = []
            pos = center[axis]
            while 0 <= pos < grid.sizes[axis]:
                idx[axis] = pos
                if valid[tuple(idx)]:
                    profile.append(gnorm[tuple(idx)])
                pos += direction
            if len(profile) < 8:
                rays[key] = "too-few-valid-nodes"
                all_monotone = False
                continue
            outer = profile[-max(2, len(profile) // 4):]
            diffs = np.diff(outer)
            ok = bool(np.all(diffs >= -1e-8 * (1.0 + np.max(np.abs(outer)))))
            rays[key] = "monotone" if ok else "not-monotone"
            all_monotone = all_monotone and ok
    verdict = COMPACT_SUFFICIENT if all_monotone else INCONCLUSIVE
    return CompactnessReport(verdict, {"rays": rays})


def estimate_expansion_threshold(model: levy.OuModel,
                                 grid: density_mod.GridSpec,
                                 N: int, ts=None, tol: float = 1e-4) -> float:
    """Empirical expansion threshold: the smallest scanned t at which the
    N-truncated spectral expansion of a Gaussian-windowed test field matches
    the grid semigroup within `tol` on the interior half of the grid.

    Returns math.inf when no scanned t passes.  (The underlying constant is
    nonconstructive; this is its measured stand-in.)
    """
    sd = polyspec._real_diagonal_data(model)
    if ts is None:
        ts = np.geomspace(0.05, 10.0, 25)
    sigmas = np.array([L / 4.0 for L in grid.half_widths])
    mesh = grid.mesh()
    window = np.exp(-0.5 * np.sum((mesh / sigmas) ** 2, axis=-1))
    fld = density_mod.DensityField(grid, window, label="gaussian_window")
    mu = density_mod.invariant_density(model, grid)
    w = grid.node_weight()

    indices = _indices_box(model.d, int(N))
    coeffs = []
    Hs = []
    for n in indices:
        Gn = polyspec.coeigenfunction_Gn(model, n, grid, form="adjoint")
        coeffs.append(float(np.sum(window * Gn.values * mu.values) * w))
        Hs.append(polyspec.eigenfunction_Hn(model, n))

    interior = np.all(np.abs(mesh) <= 0.5 * np.array(grid.half_widths),
                      axis=-1)
    pts = mesh[interior]
    H_vals = np.stack([H(pts) for H in Hs], axis=0)

    for t in np.sort(np.asarray(ts, dtype=float)):
        decay = np.array([math.exp(-t * float(np.dot(n, sd.decay_rates)))
                          for n in indices])
        expansion = np.tensordot(np.asarray(coeffs) * decay, H_vals,
                                 axes=([0], [0]))
        try:
            direct = density_mod.semigroup_apply_grid(model, fld, float(t),
                                                      points=pts)
        except density_mod.InterpolationOutOfRange:
            continue
        if float(np.max(np.abs(expansion - direct))) <= tol:
            return float(t)
    return math.inf
