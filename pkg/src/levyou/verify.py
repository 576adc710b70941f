"""Registry of numerical invariants and the runner behind the `verify` command.

Every invariant published by the compute modules (matrix operations, exponent
evaluators, densities, polynomial spectral theory, spectrum, sampling) is
registered here exactly once, with an applicability predicate (heavy-tailed
models have no polynomial moments, Mehler needs a Gaussian model, ...) and a
check body returning pass/fail plus a numeric detail line.  The CLI renders
the results as a table; the registry's per-module counts are pinned by a test
so a check can never silently drop out of coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import density as density_mod
from . import levy, matops, polyspec, simulate, spectrum

__all__ = ["Invariant", "CheckResult", "registry", "run_all",
           "module_counts"]

KS_CRIT_1PCT = 1.62762  # asymptotic 1% Kolmogorov-Smirnov critical constant


@dataclass(frozen=True)
class Invariant:
    key: str
    module: str
    description: str
    applies: Callable
    run: Callable


@dataclass(frozen=True)
class CheckResult:
    key: str
    module: str
    description: str
    applicable: bool
    passed: bool
    detail: str = ""


@dataclass
class VerifyContext:
    """Shared lazily-built state for one verification run."""

    model: levy.OuModel
    grid: density_mod.GridSpec
    seed: int = 20260822
    _cache: dict = field(default_factory=dict)

    def get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def mu(self):
        return self.get("mu", lambda: density_mod.invariant_density(
            self.model, self.grid))

    def rng(self, salt: int):
        return np.random.default_rng([self.seed, salt])


# ---------------------------------------------------------------------------
# applicability predicates
# ---------------------------------------------------------------------------

def _always(model):
    return True


def _is_stable(model):
    return isinstance(model.pi, levy.AlphaStableJumps)


def _is_symmetric_stable(model):
    return _is_stable(model) and model.pi.is_symmetric()


def _has_poly_moments(model):
    return not _is_stable(model)


def _diag_real(model):
    sd = model.spectral
    return bool(sd.diagonalizable and sd.real_spectrum
                and sd.hermite_scale is not None)


def _poly_spectral(model):
    return _has_poly_moments(model) and _diag_real(model)


def _is_gaussian(model):
    return isinstance(model.pi, levy.NullJumps)


def _exact_sampler_1d(model):
    return model.d == 1 and not _is_stable(model)


def _compensated_atoms(model):
    return (isinstance(model.pi, levy.FiniteAtomicJumps)
            and bool(np.all(np.linalg.norm(model.pi.locations, axis=1)
                            <= 1.0)))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _random_stable_pair(rng, d):
    """A random symmetric-PSD Q and a random stable B of dimension d."""
    A = rng.standard_normal((d, d))
    Q = A @ A.T + 0.1 * np.eye(d)
    B = rng.standard_normal((d, d))
    shift = np.max(np.linalg.eigvals(B).real)
    B = B - (shift + 0.5 + rng.uniform(0.0, 1.0)) * np.eye(d)
    return Q, B


def _jump_exponent_inf(model, xi):
    """Jump part of the stationary exponent: Psi_inf + (1/2)<Q_inf xi, xi>."""
    xi = np.asarray(xi, dtype=float)
    quad = np.einsum("...i,ij,...j->...", xi, model.Q_inf, xi)
    return levy.psi_inf(model, xi) + 0.5 * quad


def _result(inv, passed, detail):
    return CheckResult(key=inv.key, module=inv.module,
                       description=inv.description, applicable=True,
                       passed=bool(passed), detail=detail)


# ---------------------------------------------------------------------------
# matops invariants
# ---------------------------------------------------------------------------

def _chk_gram_limit(inv, ctx):
    worst = 0.0
    for i in range(10):
        rng = ctx.rng(100 + i)
        d = 1 + i % 3
        Q, B = _random_stable_pair(rng, d)
        t = 40.0 / abs(matops.spectral_abscissa(B))
        err = np.max(np.abs(matops.gram_qt(Q, B, t) - matops.qinf(Q, B)))
        worst = max(worst, float(err))
    return _result(inv, worst <= 1e-8, f"max |Q_t - Q_inf| = {worst:.3e}")


def _chk_expm_group(inv, ctx):
    worst = 0.0
    rng = ctx.rng(101)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        B = rng.standard_normal((d, d))
        s, t = rng.uniform(0.05, 2.0, size=2)
        whole = matops.expm(B, s + t)
        split = matops.expm(B, s) @ matops.expm(B, t)
        rel = np.max(np.abs(whole - split)) / (1.0 + np.max(np.abs(whole)))
        worst = max(worst, float(rel))
    return _result(inv, worst <= 1e-11, f"max relative defect = {worst:.3e}")


def _chk_kalman_scale(inv, ctx):
    cases = [(ctx.model.Q, ctx.model.B)]
    rng = ctx.rng(102)
    for _ in range(5):
        cases.append(_random_stable_pair(rng, int(rng.integers(1, 4))))
    ok = True
    for Q, B in cases:
        base = matops.kalman_index(Q, B)
        for c in (1e-3, 7.0, 1e4):
            if matops.kalman_index(c * Q, B) != base:
                ok = False
    return _result(inv, ok, "rank index invariant under Q -> cQ")


def _chk_lyapunov_residual(inv, ctx):
    worst = 0.0
    cases = [(ctx.model.Q, ctx.model.B)]
    rng = ctx.rng(103)
    for _ in range(10):
        cases.append(_random_stable_pair(rng, int(rng.integers(1, 5))))
    for Q, B in cases:
        X = matops.qinf(Q, B)
        resid = np.max(np.abs(B @ X + X @ B.T + Q))
        rel = resid / (1.0 + np.max(np.abs(Q)))
        worst = max(worst, float(rel))
    return _result(inv, worst <= 1e-10, f"max residual = {worst:.3e}")


# ---------------------------------------------------------------------------
# levy invariants
# ---------------------------------------------------------------------------

def _chk_hermiticity(inv, ctx):
    model = ctx.model
    rng = ctx.rng(200)
    xi = rng.standard_normal((200, model.d)) * 2.0
    worst = 0.0
    for f in (lambda z: levy.phi(model.pi, z),
              lambda z: levy.psi(model, z),
              lambda z: levy.psi_t(model, 0.7, z),
              lambda z: levy.psi_inf(model, z)):
        a = np.asarray(f(-xi))
        b = np.conj(np.asarray(f(xi)))
        err = np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b)))
        worst = max(worst, float(err))
    return _result(inv, worst <= 1e-10,
                   f"max conjugation defect = {worst:.3e}")


def _chk_flow_identity(inv, ctx):
    model = ctx.model
    rng = ctx.rng(201)
    xi = rng.standard_normal((50, model.d))
    worst = 0.0
    for s, t in ((0.3, 0.5), (0.7, 1.1), (0.2, 1.7)):
        lhs = levy.psi_t(model, s + t, xi)
        shifted = xi @ matops.expm(model.B.T, t).T
        rhs = levy.psi_t(model, t, xi) + levy.psi_t(model, s, shifted)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _result(inv, worst <= 1e-9, f"max flow defect = {worst:.3e}")


def _chk_negativity(inv, ctx):
    model = ctx.model
    rng = ctx.rng(202)
    xi = rng.standard_normal((100, model.d)) * 3.0
    worst = 0.0
    for t in (0.3, 1.0, 4.0):
        re = np.real(levy.psi_t(model, t, xi))
        worst = max(worst, float(np.max(re)))
    return _result(inv, worst <= 1e-12, f"max Re Psi_t = {worst:.3e}")


def _chk_stable_scaling(inv, ctx):
    model = ctx.model
    alpha = model.pi.alpha
    rng = ctx.rng(203)
    xi = rng.standard_normal((20, model.d))
    worst = 0.0
    for c in (0.5, 2.0):
        lhs = _jump_exponent_inf(model, c * xi)
        rhs = c ** alpha * _jump_exponent_inf(model, xi)
        err = np.max(np.abs(lhs - rhs)) / (1.0 + np.max(np.abs(lhs)))
        worst = max(worst, float(err))
    return _result(inv, worst <= 1e-8, f"max scaling defect = {worst:.3e}")


# ---------------------------------------------------------------------------
# density invariants
# ---------------------------------------------------------------------------

def _chk_roundtrip(inv, ctx):
    grid = ctx.grid
    mesh = grid.mesh()
    widths = np.array(grid.half_widths)
    vals = np.exp(-0.5 * np.sum((mesh / (widths / 5.0)) ** 2, axis=-1))
    fld = density_mod.DensityField(grid, vals)
    back = density_mod.synthesize_density(
        grid, density_mod.characteristic_values(fld))
    err = float(np.max(np.abs(back - vals)))
    return _result(inv, err <= 1e-10, f"round-trip error = {err:.3e}")


def _chk_convolution_split(inv, ctx):
    model = ctx.model
    grid = ctx.grid
    xi = density_mod.frequency_mesh(grid)
    quad = np.einsum("...i,ij,...j->...", xi, model.Q_inf, xi)
    gauss_vals = density_mod.synthesize_density(grid, np.exp(-0.5 * quad))
    jump_vals = density_mod.synthesize_density(
        grid, np.exp(_jump_exponent_inf(model, xi)))
    conv = np.real(np.fft.ifftn(np.fft.fftn(gauss_vals)
                                * np.fft.fftn(jump_vals)))
    conv = conv * grid.node_weight()
    for axis, N in enumerate(grid.sizes):
        conv = np.roll(conv, -(N // 2), axis=axis)
    err = float(np.max(np.abs(conv - ctx.mu().values)))
    return _result(inv, err <= 1e-5,
                   f"max |grid convolution - mu| = {err:.3e}")


def _chk_transition_positive(inv, ctx):
    model = ctx.model
    x = np.full(model.d, 0.25)
    fld = density_mod.transition_density(model, ctx.grid, 1.0, x)
    low = float(np.min(fld.values))
    return _result(inv, low >= -1e-9, f"min transition value = {low:.3e}")


def _chk_refinement(inv, ctx):
    model = ctx.model
    gauss = levy.OuModel(model.Q, model.B, levy.NullJumps())
    Sigma = gauss.Q_inf
    Sinv = np.linalg.inv(Sigma)
    norm = ((2.0 * math.pi) ** (model.d / 2.0)
            * math.sqrt(np.linalg.det(Sigma)))

    def exact(mesh):
        quad = np.einsum("...i,ij,...j->...", mesh, Sinv, mesh)
        return np.exp(-0.5 * quad) / norm

    errs = []
    for N in (16, 32):
        # Deliberately coarse grids: synthesize without the coarseness gate,
        # since the h-driven aliasing error is the quantity under test.
        g = density_mod.GridSpec(
            density_mod.default_grid(gauss).half_widths, (N,) * model.d)
        xi = density_mod.frequency_mesh(g)
        quad = np.einsum("...i,ij,...j->...", xi, Sigma, xi)
        vals = density_mod.synthesize_density(g, np.exp(-0.5 * quad))
        errs.append(float(np.max(np.abs(vals - exact(g.mesh())))))
    ratio = errs[0] / max(errs[1], 1e-300)
    return _result(inv, ratio >= 4.0,
                   f"error {errs[0]:.3e} -> {errs[1]:.3e}, ratio {ratio:.2f}")


# ---------------------------------------------------------------------------
# polyspec invariants
# ---------------------------------------------------------------------------

def _monomials_through(d, deg):
    return [polyspec.Poly.monomial(m)
            for k in range(deg + 1) for m in levy._multi_indices(d, k)]


def _chk_lambda_intertwining(inv, ctx):
    model = ctx.model
    worst = 0.0
    for Qt in (np.zeros_like(model.Q), 0.5 * model.Q):
        lam = polyspec.build_lambda(model, Qt)
        for t in (0.3, 1.0, 3.0):
            # the target is the pure Q~-diffusion semigroup: the kernel's
            # jump cumulants absorb the jump exponent via the flow identity
            target = polyspec.transition_kernel(Qt, model.B,
                                                levy.NullJumps(), t)
            for p in _monomials_through(model.d, 6):
                lhs = polyspec.convolve_markov(
                    lam, polyspec.poly_semigroup_apply(model, p, t))
                rhs = polyspec.convolve_markov(
                    target, polyspec.convolve_markov(lam, p))
                worst = max(worst, lhs.coeff_distance(rhs)
                            / (1.0 + lhs.max_abs_coeff()))
    return _result(inv, worst <= 1e-9,
                   f"max intertwining residual = {worst:.3e}")


def _chk_eigen_relation(inv, ctx):
    model = ctx.model
    worst = 0.0
    for n in spectrum._indices_box(model.d, 6):
        Hn = polyspec.eigenfunction_Hn(model, n)
        for t in (0.3, 1.0, 3.0):
            lhs = polyspec.poly_semigroup_apply(model, Hn, t)
            rhs = Hn * polyspec.eigenvalue_of_index(model, n, t)
            worst = max(worst, lhs.coeff_distance(rhs)
                        / (1.0 + rhs.max_abs_coeff()))
    return _result(inv, worst <= 1e-9, f"max eigen residual = {worst:.3e}")


def _chk_span(inv, ctx):
    model = ctx.model
    k = 4
    indices = spectrum._indices_box(model.d, k)
    basis = {m: i for i, m in enumerate(
        [m for kk in range(k + 1) for m in levy._multi_indices(model.d, kk)])}
    A = np.zeros((len(indices), len(basis)))
    for r, n in enumerate(indices):
        for m, c in polyspec.eigenfunction_Hn(model, n).coeffs.items():
            A[r, basis[m]] = c
    rank = int(np.linalg.matrix_rank(A, tol=1e-8))
    return _result(inv, rank == len(indices),
                   f"rank {rank} of {len(indices)} eigenfunctions")


def _chk_growth(inv, ctx):
    model = ctx.model
    rng = ctx.rng(400)
    pts = rng.uniform(-3.0, 3.0, size=(200, model.d))
    eps = 0.5
    weights = np.exp(-eps * np.sum(pts ** 2, axis=-1))
    maxima = []
    for k in range(9):
        level = 0.0
        for n in levy._multi_indices(model.d, k):
            vals = np.abs(polyspec.eigenfunction_Hn(model, n)(pts)) * weights
            level = max(level, float(np.max(vals)))
        maxima.append(max(level, 1e-300))
    ratios = [maxima[k + 1] / maxima[k] for k in range(8)]
    fitted = max(ratios[:4])
    ok = all(r <= 1.1 * fitted for r in ratios[4:])
    return _result(inv, ok,
                   f"fitted ratio {fitted:.3f}, max later {max(ratios[4:]):.3f}")


def _chk_triangularity(inv, ctx):
    model = ctx.model
    rng = ctx.rng(401)
    kernels = [polyspec.build_lambda(model, 0.5 * model.Q)]
    if _diag_real(model):
        kernels.append(polyspec.build_V(model))
    ok = True
    detail = "degree never raised; top part maps through the pre-map"
    for kern in kernels:
        for _ in range(10):
            deg = int(rng.integers(1, 6))
            p = polyspec.Poly(model.d, {
                m: rng.standard_normal()
                for m in levy._multi_indices(model.d, deg)})
            out = polyspec.convolve_markov(kern, p)
            if out.degree > p.degree:
                ok = False
                detail = "degree raised"
                continue
            top = polyspec.compose_linear(p.homogeneous_part(deg),
                                          kern.pre_map)
            if out.homogeneous_part(deg).coeff_distance(top) > 1e-9 * (
                    1.0 + top.max_abs_coeff()):
                ok = False
                detail = "leading part not a pre-map image"
    return _result(inv, ok, detail)


# ---------------------------------------------------------------------------
# spectrum invariants
# ---------------------------------------------------------------------------

def _chk_lattice_agreement(inv, ctx):
    model = ctx.model
    rates = model.spectral.decay_rates
    worst = 0.0
    for k in range(7):
        mat = spectrum.drift_operator_matrix(model.B, k)
        got = np.sort(np.linalg.eigvals(mat).real)
        want = np.sort([-float(np.dot(n, rates))
                        for n in levy._multi_indices(model.d, k)])
        worst = max(worst, float(np.max(np.abs(got - want))) if len(want)
                    else 0.0)
    return _result(inv, worst <= 1e-9,
                   f"max eigenvalue mismatch = {worst:.3e}")


def _chk_isospectrality(inv, ctx):
    ok = spectrum.isospectrality_check(ctx.model, 6)
    return _result(inv, ok, "generator and drift multiplicity tables match")


def _chk_mehler_positive(inv, ctx):
    model = ctx.model
    mu = ctx.mu()
    x = np.full(model.d, 0.5)
    t = 1.0
    Qt = matops.gram_qt(model.Q, model.B, t)
    Qinf = model.Q_inf
    mesh = ctx.grid.mesh()
    resid = mesh - (matops.expm(model.B, t) @ x)
    quad_inf = np.einsum("...i,ij,...j->...", mesh, np.linalg.inv(Qinf),
                         mesh)
    quad_t = np.einsum("...i,ij,...j->...", resid, np.linalg.inv(Qt), resid)
    # log of the closed-form factor; the factor itself can under/overflow a
    # double when Q_t is far smaller than Q_inf, yet its sign is determined.
    log_closed = (0.5 * math.log(np.linalg.det(Qinf) / np.linalg.det(Qt))
                  + 0.5 * quad_inf - 0.5 * quad_t)
    # Positivity is only decidable where the synthesized density is itself
    # meaningfully representable; below the floor the grid values are signed
    # roundoff dust that the exponential closed-form factor then amplifies.
    meaningful = mu.values > polyspec.DENSITY_FLOOR
    log_prod = log_closed[meaningful] + np.log(mu.values[meaningful])
    passed = bool(np.all(np.isfinite(log_prod)))
    low = float(np.min(log_prod))
    return _result(inv, passed, f"min log(closedForm*mu) = {low:.3e}")


def _chk_spectral_apply_exact(inv, ctx):
    model = ctx.model
    rng = ctx.rng(500)
    worst = 0.0
    for _ in range(3):
        p = polyspec.Poly(model.d, {
            m: rng.standard_normal()
            for k in range(4) for m in levy._multi_indices(model.d, k)})
        for t in (0.1, 1.0, 10.0):
            via_spec = spectrum.spectral_apply(model, t, p, 3)
            direct = polyspec.poly_semigroup_apply(model, p, t)
            worst = max(worst, via_spec.coeff_distance(direct)
                        / (1.0 + direct.max_abs_coeff()))
    return _result(inv, worst <= 1e-9, f"max expansion residual = {worst:.3e}")


# ---------------------------------------------------------------------------
# simulate invariants
# ---------------------------------------------------------------------------

def _chk_ks_longrun(inv, ctx):
    from scipy.stats import kstest

    model = ctx.model
    t = 40.0 / abs(matops.spectral_abscissa(model.B))
    cfg = simulate.SamplerConfig(seed=ctx.seed, sample_count=100_000)
    samples = simulate.sample_transition(model, np.zeros(model.d), t,
                                         cfg)[:, 0]
    mu = ctx.mu()
    xs = ctx.grid.axes()[0]
    h = ctx.grid.spacings[0]
    vals = mu.values
    # trapezoid cumulative (left-Riemann would bias the CDF by ~h*f/2)
    cdf_vals = (np.cumsum(vals) - 0.5 * vals - 0.5 * vals[0]) * h
    cdf_vals = np.clip(cdf_vals / cdf_vals[-1], 0.0, 1.0)

    def cdf(q):
        return np.interp(q, xs, cdf_vals, left=0.0, right=1.0)

    stat = kstest(samples, cdf).statistic
    bound = 2.0 * KS_CRIT_1PCT / math.sqrt(samples.shape[0])
    return _result(inv, stat <= bound,
                   f"KS = {stat:.4e}, bound = {bound:.4e}")


def _chk_compensator(inv, ctx):
    model = ctx.model
    t = 1.5
    x = np.zeros(model.d)
    cfg = simulate.SamplerConfig(seed=ctx.seed + 1, sample_count=50_000)
    samples = simulate.sample_transition(model, x, t, cfg)
    resid = samples - (matops.expm(model.B, t) @ x)
    mean = resid.mean(axis=0)
    sig = resid.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])
    z = float(np.max(np.abs(mean) / np.maximum(sig, 1e-300)))
    return _result(inv, z <= 3.0, f"max |mean|/stderr = {z:.2f}")


def _chk_stable_halving(inv, ctx):
    model = ctx.model
    t = 1.0
    x = np.zeros(model.d)
    xi = np.array([[0.4] * model.d, [1.1] * model.d])
    n = 100_000
    vals = []
    for step in (t / 256.0, t / 512.0):
        cfg = simulate.SamplerConfig(seed=ctx.seed + 2, sample_count=n,
                                     time_step=step)
        samples = simulate.sample_transition(model, x, t, cfg)
        vals.append(simulate.empirical_cf(samples, xi))
    diff = float(np.max(np.abs(vals[0] - vals[1])))
    floor = 3.0 * math.sqrt(2.0) / math.sqrt(n)
    return _result(inv, diff <= floor,
                   f"cf shift {diff:.4e}, noise floor {floor:.4e}")


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def registry() -> list:
    return [
        Invariant("matops.gramian_limit", "matops",
                  "finite-horizon Gramian converges to the stationary one",
                  _always, _chk_gram_limit),
        Invariant("matops.expm_group_law", "matops",
                  "matrix exponential satisfies the group law",
                  _always, _chk_expm_group),
        Invariant("matops.kalman_scale_invariance", "matops",
                  "controllability index invariant under diffusion scaling",
                  _always, _chk_kalman_scale),
        Invariant("matops.lyapunov_residual", "matops",
                  "stationary Gramian solves the Lyapunov equation",
                  _always, _chk_lyapunov_residual),
        Invariant("levy.hermiticity", "levy",
                  "all exponents conjugate under xi -> -xi",
                  _always, _chk_hermiticity),
        Invariant("levy.flow_identity", "levy",
                  "finite-horizon exponents satisfy the semigroup flow",
                  _always, _chk_flow_identity),
        Invariant("levy.negativity", "levy",
                  "real part of the exponent is nonpositive",
                  _always, _chk_negativity),
        Invariant("levy.stable_scaling", "levy",
                  "stationary jump exponent is alpha-homogeneous",
                  _is_symmetric_stable, _chk_stable_scaling),
        Invariant("density.roundtrip", "density",
                  "forward then inverse transform is the identity",
                  _always, _chk_roundtrip),
        Invariant("density.convolution_split", "density",
                  "invariant law factors as Gaussian * jump convolution",
                  _is_stable, _chk_convolution_split),
        Invariant("density.transition_positivity", "density",
                  "transition densities have no ringing below -1e-9",
                  _always, _chk_transition_positive),
        Invariant("density.refinement", "density",
                  "halving the spacing shrinks Gaussian error at least 4x",
                  _always, _chk_refinement),
        Invariant("polyspec.lambda_intertwining", "polyspec",
                  "diffusion-reducing kernel intertwines the semigroups",
                  _has_poly_moments, _chk_lambda_intertwining),
        Invariant("polyspec.eigen_relation", "polyspec",
                  "polynomial eigenfunctions decay at the lattice rates",
                  _poly_spectral, _chk_eigen_relation),
        Invariant("polyspec.span", "polyspec",
                  "eigenfunctions through degree k span all polynomials",
                  _poly_spectral, _chk_span),
        Invariant("polyspec.growth", "polyspec",
                  "Gaussian-weighted eigenfunction maxima grow geometrically",
                  _poly_spectral, _chk_growth),
        Invariant("polyspec.triangularity", "polyspec",
                  "Markov convolution is triangular in total degree",
                  _has_poly_moments, _chk_triangularity),
        Invariant("spectrum.lattice_agreement", "spectrum",
                  "drift-operator eigenvalues equal the rate lattice",
                  _diag_real, _chk_lattice_agreement),
        Invariant("spectrum.isospectrality", "spectrum",
                  "generator and drift multiplicity tables agree",
                  _has_poly_moments, _chk_isospectrality),
        Invariant("spectrum.mehler_positivity", "spectrum",
                  "closed-form kernel times invariant density is positive",
                  _is_gaussian, _chk_mehler_positive),
        Invariant("spectrum.spectral_apply_exact", "spectrum",
                  "truncated expansion is exact on low-degree polynomials",
                  _poly_spectral, _chk_spectral_apply_exact),
        Invariant("simulate.ks_longrun", "simulate",
                  "long-run samples match the invariant distribution (KS)",
                  _exact_sampler_1d, _chk_ks_longrun),
        Invariant("simulate.compensator", "simulate",
                  "compensated small jumps leave the mean at e^{tB}x",
                  _compensated_atoms, _chk_compensator),
        Invariant("simulate.stable_halving", "simulate",
                  "halving the stable step stays under the MC noise floor",
                  _is_stable, _chk_stable_halving),
    ]


def module_counts() -> dict:
    counts: dict = {}
    for inv in registry():
        counts[inv.module] = counts.get(inv.module, 0) + 1
    return counts


def run_all(model: levy.OuModel, grid: density_mod.GridSpec | None = None,
            seed: int = 20260822) -> list:
    """Run every applicable invariant; inapplicable ones are reported as
    skipped rather than silently dropped."""
    if grid is None:
        grid = density_mod.default_grid(model)
    ctx = VerifyContext(model=model, grid=grid, seed=seed)
    results = []
    for inv in registry():
        if not inv.applies(model):
            results.append(CheckResult(
                key=inv.key, module=inv.module, description=inv.description,
                applicable=False, passed=True, detail="not applicable"))
            continue
        results.append(inv.run(inv, ctx))
    return results
