"""Jump measures and Levy-Khintchine exponents for Levy-driven OU generators.

The generator acts as

    A u(x) = (1/2) tr(Q grad^2 u)(x) + <Bx, grad u(x)>
             + int [u(x+y) - u(x) - <grad u(x), y> 1_{|y|<=1}] Pi(dy),

with the compensator truncation always taken on the original jump y.  This
module evaluates the associated exponents

    Psi(xi)    = -(1/2)<Q xi, xi> + Phi(xi),
    Psi_t(xi)  = -(1/2)<Q_t xi, xi> + int_0^t Phi(e^{s B^T} xi) ds,
    Psi_inf    = the t -> infinity limit,

and computes moments and cumulants of the time-integrated jump measure and of
the invariant law.  Four jump-measure variants are supported: no jumps, finite
atomic, compound Poisson with a gridded density, and spectrally decomposed
alpha-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

import numpy as np
from scipy.special import gamma as _gamma_fn

from . import matops
from ._quad import panel_integrate
from .errors import (
    DivergentMoment,
    HypoellipticityFailure,
    IncompleteTable,
    UnstableDrift,
)

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .density import DensityField

__all__ = [
    "NullJumps",
    "FiniteAtomicJumps",
    "CompoundPoissonDensityJumps",
    "AlphaStableJumps",
    "JumpSpec",
    "OuModel",
    "CumulantTable",
    "MeasureDiagnostics",
    "phi",
    "psi",
    "psi_t",
    "psi_inf",
    "horizon",
    "measure_diagnostics",
    "pi_inf_moment",
    "cumulants_mu",
    "jump_mean_outside_unit_ball",
    "jump_mean_inside_unit_ball",
    "jump_second_moment",
    "jump_monomial_moment",
    "jump_total_rate",
]

HORIZON_TOL = 1e-14


# ---------------------------------------------------------------------------
# jump-measure variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullJumps:
    """No jump component."""

    variant = "null"

    @property
    def dim(self):
        return None


@dataclass(frozen=True)
class FiniteAtomicJumps:
    """Finitely many atoms: Pi = sum_k w_k * delta_{y_k}.

    locations: (K, d) array of atom positions y_k (none at the origin);
    weights: (K,) positive jump rates.
    """

    locations: np.ndarray
    weights: np.ndarray

    variant = "finite_atomic"

    def __post_init__(self):
        locs = np.atleast_2d(np.asarray(self.locations, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if locs.shape[0] != w.shape[0]:
            raise ValueError("atom locations and weights disagree in length")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if np.any(np.linalg.norm(locs, axis=1) == 0.0):
            raise ValueError("no atom may sit at the origin")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.locations.shape[1]


@dataclass(frozen=True)
class CompoundPoissonDensityJumps:
    """Compound Poisson jumps: rate * (probability density on a bounded grid).

    The jump density is carried as a DensityField; it must be nonnegative and
    integrate to 1 within 1e-8 over its (bounded) grid.
    """

    rate: float
    jump_density: "DensityField"

    variant = "compound_poisson_density"

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("compound Poisson rate must be positive")
        vals = np.asarray(self.jump_density.values, dtype=float)
        if np.any(vals < -1e-12):
            raise ValueError("jump density must be nonnegative")
        mass = self.jump_density.mass()
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"jump density mass {mass!r} is not 1 within 1e-8")

    @property
    def dim(self):
        return self.jump_density.grid.dim

    def quadrature_atoms(self):
        """Grid nodes and trapezoid weights of rate * density (drops zeros)."""
        pts = self.jump_density.grid.flat_nodes()
        w = self.jump_density.grid.trapezoid_weights().ravel()
        w = w * np.clip(self.jump_density.values.ravel(), 0.0, None) * self.rate
        keep = w > 0
        return pts[keep], w[keep]


@dataclass(frozen=True)
class AlphaStableJumps:
    """Spectrally decomposed alpha-stable jumps.

    Pi(dy) = sum_k sigma_k * [radial measure alpha * r^{-1-alpha} dr along
    direction e_k], with unit directions e_k and positive weights sigma_k.
    The radial normalization puts tail mass sigma_k beyond radius 1 along
    each direction.  alpha = 1 is out of scope.
    """

    alpha: float
    directions: np.ndarray
    weights: np.ndarray

    variant = "alpha_stable"

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 2.0) or a == 1.0:
            raise ValueError("alpha must lie in (0,2) with alpha != 1")
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if dirs.shape[0] != w.shape[0]:
            raise ValueError("directions and weights disagree in length")
        if np.any(w <= 0):
            raise ValueError("spherical weights must be positive")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("directions must be unit vectors within 1e-12")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.directions.shape[1]

    def is_symmetric(self) -> bool:
        """True when the atom set is invariant under y -> -y with equal weights."""
        for e, w in zip(self.directions, self.weights):
            match = np.all(np.abs(self.directions + e) <= 1e-12, axis=1)
            if not np.any(match) or abs(self.weights[match][0] - w) > 1e-12:
                return False
        return True


JumpSpec = Union[NullJumps, FiniteAtomicJumps, CompoundPoissonDensityJumps,
                 AlphaStableJumps]


# ---------------------------------------------------------------------------
# plain moments of the jump measure Pi itself
# ---------------------------------------------------------------------------

def jump_total_rate(pi: JumpSpec) -> float:
    """Total mass of Pi (the Poisson jump rate); infinite for stable jumps."""
    if isinstance(pi, NullJumps):
        return 0.0
    if isinstance(pi, FiniteAtomicJumps):
        return float(np.sum(pi.weights))
    if isinstance(pi, CompoundPoissonDensityJumps):
        return float(pi.rate)
    return math.inf


def jump_mean_inside_unit_ball(pi: JumpSpec, d: int) -> np.ndarray:
    """int_{|y|<=1} y Pi(dy); the compensator drift rate."""
    if isinstance(pi, NullJumps):
        return np.zeros(d)
    if isinstance(pi, FiniteAtomicJumps):
        inside = np.linalg.norm(pi.locations, axis=1) <= 1.0
        return pi.weights[inside] @ pi.locations[inside]
    if isinstance(pi, CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
        inside = np.linalg.norm(pts, axis=1) <= 1.0
        return w[inside] @ pts[inside]
    # alpha-stable: int_0^1 r * alpha r^{-1-alpha} dr = alpha/(1-alpha), alpha<1;
    # diverges for alpha > 1 only at the? no: the small-jump first moment
    # int_0^1 r^{-alpha} dr converges iff alpha < 1.
    a = pi.alpha
    if a >= 1.0:
        raise DivergentMoment(
            "small-jump mean diverges for alpha >= 1; only the compensated "
            "exponent is defined"
        )
    radial = a / (1.0 - a)
    return radial * (pi.weights @ pi.directions)


def jump_mean_outside_unit_ball(pi: JumpSpec, d: int) -> np.ndarray:
    """int_{|y|>1} y Pi(dy); the uncompensated large-jump mean rate."""
    if isinstance(pi, NullJumps):
        return np.zeros(d)
    if isinstance(pi, FiniteAtomicJumps):
        outside = np.linalg.norm(pi.locations, axis=1) > 1.0
        return pi.weights[outside] @ pi.locations[outside]
    if isinstance(pi, CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
        outside = np.linalg.norm(pts, axis=1) > 1.0
        return w[outside] @ pts[outside]
    a = pi.alpha
    if a <= 1.0:
        raise DivergentMoment(
            f"large-jump mean diverges for alpha = {a} <= 1"
        )
    radial = a / (a - 1.0)  # int_1^inf r * alpha r^{-1-alpha} dr
    return radial * (pi.weights @ pi.directions)


def jump_second_moment(pi: JumpSpec, d: int) -> np.ndarray:
    """int y y^T Pi(dy); raises DivergentMoment for stable jumps."""
    if isinstance(pi, NullJumps):
        return np.zeros((d, d))
    if isinstance(pi, FiniteAtomicJumps):
        return np.einsum("k,ki,kj->ij", pi.weights, pi.locations, pi.locations)
    if isinstance(pi, CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
        return np.einsum("k,ki,kj->ij", w, pts, pts)
    raise DivergentMoment("second moment of an alpha-stable measure diverges")


def jump_monomial_moment(pi: JumpSpec, m) -> float:
    """Plain jump-measure moment int y^m Pi(dy) for a multi-index with |m| >= 2.

    Finite for the finite-activity variants (atoms, gridded compound Poisson);
    DivergentMoment for stable jumps, where no integer moment of order >= 2
    exists.
    """
    m = tuple(int(v) for v in m)
    if sum(m) < 2:
        raise ValueError("plain jump moments are defined for |m| >= 2 here; "
                         "use the unit-ball means for order 1")
    if isinstance(pi, NullJumps):
        return 0.0
    if isinstance(pi, AlphaStableJumps):
        raise DivergentMoment(
            f"jump moment of order {sum(m)} diverges for stable jumps"
        )
    if isinstance(pi, FiniteAtomicJumps):
        pts, w = pi.locations, pi.weights
    else:
        pts, w = pi.quadrature_atoms()
    mono = np.prod(pts ** np.asarray(m, dtype=int)[None, :], axis=1)
    return float(w @ mono)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------

def _phi_atoms(points, weights, xi):
    """Compensated sum over explicit atoms; xi has shape (..., d)."""
    xs = np.tensordot(xi, points, axes=([-1], [1]))  # (..., K)
    inside = np.linalg.norm(points, axis=1) <= 1.0
    comp = np.where(inside, 1.0, 0.0)
    terms = np.exp(1j * xs) - 1.0 - 1j * xs * comp
    return np.tensordot(terms, weights, axes=([-1], [0]))


def _phi_stable(pi: AlphaStableJumps, xi):
    a = pi.alpha
    u = np.tensordot(xi, pi.directions, axes=([-1], [1]))  # (..., K)
    ga = _gamma_fn(-a)
    radial = a * (ga * np.power(-1j * u + 0j, a) + 1j * u / (a - 1.0))
    return np.tensordot(radial, pi.weights, axes=([-1], [0]))


def phi(pi: JumpSpec, xi):
    """Jump exponent Phi(xi) = int (e^{i<xi,y>} - 1 - i<xi,y> 1_{|y|<=1}) Pi(dy).

    Vectorized over leading axes of `xi` (shape (..., d)).  Finite-atomic and
    gridded compound-Poisson variants sum over explicit atoms; the stable
    variant uses the per-direction closed-form radial integral

        int_0^inf (e^{iur} - 1 - iur 1_{r<=1}) alpha r^{-1-alpha} dr
            = alpha * [Gamma(-alpha) (-iu)^alpha + iu/(alpha-1)],

    valid on both sides of alpha = 1 with the principal branch.
    """
    xi = np.asarray(xi, dtype=float)
    if isinstance(pi, NullJumps):
        return np.zeros(xi.shape[:-1], dtype=complex) if xi.ndim > 1 else 0j
    if isinstance(pi, FiniteAtomicJumps):
        return _phi_atoms(pi.locations, pi.weights, xi)
    if isinstance(pi, CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
        return _phi_atoms(pts, w, xi)
    return _phi_stable(pi, xi)


def horizon(B) -> float:
    """Integration horizon T* with e^{(s(B)+eps) T*} <= 1e-14, eps = |s(B)|/100."""
    absc = matops.spectral_abscissa(B)
    if absc >= 0:
        raise UnstableDrift("horizon undefined for non-stable drift")
    eps = abs(absc) / 100.0
    return math.log(HORIZON_TOL) / (absc + eps)


class OuModel:
    """A Levy-driven OU model: diffusion matrix Q, drift B, jump measure Pi.

    Construction validates the two structural assumptions: (1) the
    finite-horizon covariances are nondegenerate (controllability rank
    condition; `kalman_index` is cached as `hypoellipticity_index`), and
    (2) the drift is stable and the jump measure has a finite log-moment.
    Derived quantities (stationary Gramian, spectral data, cumulant tables,
    per-time convolution data) are cached; the caches are append-only, so
    concurrent readers are safe.
    """

    def __init__(self, Q, B, pi: JumpSpec | None = None):
        Q = np.asarray(Q, dtype=float)
        B = np.asarray(B, dtype=float)
        if Q.shape != B.shape or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q and B must be square matrices of equal shape")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * (1.0 + np.max(np.abs(Q))):
            raise ValueError("Q must be symmetric")
        pi = NullJumps() if pi is None else pi
        if pi.dim is not None and pi.dim != Q.shape[0]:
            raise ValueError("jump measure dimension disagrees with Q/B")
        self.Q = 0.5 * (Q + Q.T)
        self.B = B
        self.pi = pi

        if matops.spectral_abscissa(B) >= 0:
            raise UnstableDrift(
                "assumption (2) fails: drift spectral abscissa >= 0"
            )
        self.Q_inf = matops.qinf(self.Q, self.B)
        try:
            self.hypoellipticity_index = matops.kalman_index(self.Q, self.B)
        except HypoellipticityFailure as err:
            raise HypoellipticityFailure(
                f"assumption (1) fails: {err}"
            ) from err
        self.spectral = matops.spectral_data(self.B, self.Q_inf)
        diag = measure_diagnostics(self.pi, n_max=1, kappa_grid=())
        if not diag.log_moment:
            raise DivergentMoment(
                "assumption (2) fails: jump measure lacks a finite log-moment"
            )
        self.horizon = horizon(self.B)
        self._cumulants: CumulantTable | None = None
        self._cache: dict = {}

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    # -- cached helpers ----------------------------------------------------

    def cumulants(self, max_order: int) -> "CumulantTable":
        """Cumulant table of the invariant law, cached at the largest order built."""
        if self._cumulants is None or self._cumulants.max_order < max_order:
            self._cumulants = cumulants_mu(self, max_order)
        return self._cumulants

    def cache(self, key, build):
        """Fetch-or-build an immutable cached value."""
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]


def psi(model: OuModel, xi):
    """Generator exponent Psi(xi) = -(1/2)<Q xi, xi> + Phi(xi)."""
    xi = np.asarray(xi, dtype=float)
    quad = np.einsum("...i,ij,...j->...", xi, model.Q, xi)
    return -0.5 * quad + phi(model.pi, xi)


def _phi_time_integral(model: OuModel, upper: float, xi, tol=1e-12):
    """int_0^upper Phi(e^{s B^T} xi) ds, vectorized over xi (..., d)."""
    if isinstance(model.pi, NullJumps):
        return np.zeros(np.asarray(xi).shape[:-1], dtype=complex)
    BT = model.B.T

    def integrand(nodes):
        E = matops.expm_batch(BT, nodes)  # (K, d, d)
        eta = np.einsum("kij,...j->k...i", E, xi)
        return phi(model.pi, eta)

    norm_b = np.linalg.norm(model.B, 2)
    initial = int(min(256, max(4, np.ceil(upper * max(1.0, norm_b) / 2.0))))
    return panel_integrate(integrand, 0.0, upper, tol=tol,
                           initial_panels=initial)


def psi_t(model: OuModel, t: float, xi):
    """Finite-horizon exponent Psi_t(xi) = -(1/2)<Q_t xi,xi> + int_0^t Phi(e^{sB^T}xi) ds.

    Satisfies the flow identity Psi_{s+t}(xi) = Psi_t(xi) + Psi_s(e^{tB^T} xi).
    """
    xi = np.asarray(xi, dtype=float)
    t = float(t)
    if t == 0.0:
        return np.zeros(xi.shape[:-1], dtype=complex)
    Qt = model.cache(("gram", t), lambda: matops.gram_qt(model.Q, model.B, t))
    quad = np.einsum("...i,ij,...j->...", xi, Qt, xi)
    return -0.5 * quad + _phi_time_integral(model, t, xi)


def psi_inf(model: OuModel, xi):
    """Stationary exponent: -(1/2)<Q_inf xi, xi> + int_0^{T*} Phi(e^{sB^T}xi) ds.

    The Gaussian part uses the exact Lyapunov Gramian; the jump part is
    integrated to the horizon T* at which the integrand has decayed below
    1e-14 relative to its initial size.
    """
    xi = np.asarray(xi, dtype=float)
    quad = np.einsum("...i,ij,...j->...", xi, model.Q_inf, xi)
    return -0.5 * quad + _phi_time_integral(model, model.horizon, xi)


# ---------------------------------------------------------------------------
# diagnostics and moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureDiagnostics:
    """Analytic moment diagnostics of a jump measure.

    log_moment: int_{|y|>1} ln|y| Pi(dy) < infinity.
    poly_moment: for each n in 1..n_max, whether int_{|y|>1}|y|^n Pi(dy) < inf.
    exp_moment: for each requested kappa > 0, whether
        int_{|y|>1} e^{kappa|y|} Pi(dy) < infinity.
    """

    log_moment: bool
    poly_moment: dict = field(default_factory=dict)
    exp_moment: dict = field(default_factory=dict)

    def poly_order_ok(self, n: int) -> bool:
        if n in self.poly_moment:
            return self.poly_moment[n]
        return min(self.poly_moment.values(), default=True)


def measure_diagnostics(pi: JumpSpec, n_max: int, kappa_grid=()) -> MeasureDiagnostics:
    """Moment diagnostics, answered analytically per variant.

    Bounded-support variants (finite atomic, gridded compound Poisson) and the
    null measure satisfy every diagnostic.  The alpha-stable variant has the
    log-moment, polynomial moments of order n strictly below alpha, and no
    exponential moments.
    """
    if isinstance(pi, AlphaStableJumps):
        poly = {n: (n < pi.alpha) for n in range(1, n_max + 1)}
        expm = {float(k): False for k in kappa_grid}
        return MeasureDiagnostics(log_moment=True, poly_moment=poly,
                                  exp_moment=expm)
    poly = {n: True for n in range(1, n_max + 1)}
    expm = {float(k): True for k in kappa_grid}
    return MeasureDiagnostics(log_moment=True, poly_moment=poly,
                              exp_moment=expm)


def _transported_monomial_rate(pi: JumpSpec, B, orders: list[tuple[int, ...]]):
    """Return f(s) -> array (K_nodes, n_orders) of int (e^{sB} y)^m Pi(dy)."""
    if isinstance(pi, FiniteAtomicJumps):
        pts, w = pi.locations, pi.weights
    elif isinstance(pi, CompoundPoissonDensityJumps):
        pts, w = pi.quadrature_atoms()
    else:  # pragma: no cover - guarded by callers
        raise DivergentMoment("transported moments undefined for this variant")
    orders_arr = np.asarray(orders, dtype=int)  # (R, d)

    def f(nodes):
        E = matops.expm_batch(B, nodes)          # (K, d, d)
        z = np.einsum("kij,aj->kai", E, pts)     # (K, A, d)
        logs = z[:, :, None, :] ** orders_arr[None, None, :, :]  # (K, A, R, d)
        mono = np.prod(logs, axis=-1)            # (K, A, R)
        return np.tensordot(mono, w, axes=([1], [0]))  # (K, R)

    return f


def pi_inf_moment(model: OuModel, m) -> float:
    """Moment int y^m Pi_inf(dy) = int_0^{T*} int (e^{sB}y)^m Pi(dy) ds.

    Raises DivergentMoment when the moment does not exist (stable jumps: the
    radial integral never converges at both ends for integer orders).
    """
    m = tuple(int(v) for v in m)
    order = sum(m)
    if order < 1:
        raise ValueError("moment order must be >= 1")
    pi = model.pi
    if isinstance(pi, NullJumps):
        return 0.0
    if isinstance(pi, AlphaStableJumps):
        raise DivergentMoment(
            f"order-{order} moment of the time-integrated stable measure "
            "diverges (small jumps for orders <= alpha, tails otherwise)"
        )
    diag = measure_diagnostics(pi, n_max=order)
    if not diag.poly_order_ok(order):
        raise DivergentMoment(f"polynomial moment of order {order} fails")
    f = _transported_monomial_rate(pi, model.B, [m])
    val = panel_integrate(f, 0.0, model.horizon, tol=1e-12,
                          initial_panels=int(max(8, model.horizon)))
    return float(val[0])


@dataclass(frozen=True)
class CumulantTable:
    """Cumulants kappa_m of a law on R^d, complete for all 1 <= |m| <= max_order.

    The generating convention is K(w) = sum_m kappa_m w^m / m!, so the
    order-2 entries are the covariance matrix entries themselves.
    """

    dim: int
    max_order: int
    entries: dict

    def __getitem__(self, m) -> float:
        m = tuple(int(v) for v in m)
        order = sum(m)
        if order == 0:
            return 0.0
        if order > self.max_order:
            raise IncompleteTable(
                f"cumulant of order {order} requested from a table of "
                f"max_order {self.max_order}"
            )
        return self.entries.get(m, 0.0)

    def covariance(self) -> np.ndarray:
        C = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                m = [0] * self.dim
                m[i] += 1
                m[j] += 1
                C[i, j] = self[tuple(m)]
        return C

    def with_covariance(self, C: np.ndarray) -> "CumulantTable":
        """Copy of the table with the order-2 block replaced by C."""
        entries = {m: v for m, v in self.entries.items() if sum(m) != 2}
        d = self.dim
        for i in range(d):
            for j in range(i, d):
                m = [0] * d
                m[i] += 1
                m[j] += 1
                entries[tuple(m)] = float(C[i, j])
        return CumulantTable(dim=d, max_order=self.max_order, entries=entries)


def _multi_indices(d: int, order: int):
    """All multi-indices in d variables of exact total order."""
    if d == 1:
        yield (order,)
        return
    for head in range(order, -1, -1):
        for tail in _multi_indices(d - 1, order - head):
            yield (head,) + tail


def cumulants_mu(model: OuModel, max_order: int) -> CumulantTable:
    """Cumulant table of the invariant law.

    Order 1: -B^{-1} int_{|y|>1} y Pi(dy) (the truncation acts on the original
    jump, so the time integral has this closed form).  Order 2: stationary
    Gramian of Q plus the stationary Gramian of the jump second-moment matrix
    (both exact Lyapunov solves).  Orders >= 3: time-integrated monomial
    moments of the jump measure by panel quadrature, all orders in one pass.
    """
    d = model.d
    entries: dict = {}
    pi = model.pi

    if max_order >= 1:
        try:
            m1p = jump_mean_outside_unit_ball(pi, d)
        except DivergentMoment:
            raise DivergentMoment(
                "first cumulant of the invariant law diverges"
            )
        k1 = -np.linalg.solve(model.B, m1p)
        for i in range(d):
            m = [0] * d
            m[i] = 1
            entries[tuple(m)] = float(k1[i])

    if max_order >= 2:
        K2 = model.Q_inf.copy()
        if not isinstance(pi, NullJumps):
            S2 = jump_second_moment(pi, d)  # DivergentMoment for stable
            K2 = K2 + matops.qinf(S2, model.B)
        for i in range(d):
            for j in range(i, d):
                m = [0] * d
                m[i] += 1
                m[j] += 1
                entries[tuple(m)] = float(K2[i, j])

    if max_order >= 3 and not isinstance(pi, NullJumps):
        if isinstance(pi, AlphaStableJumps):
            raise DivergentMoment(
                "cumulants of order >= 2 do not exist for stable jumps"
            )
        orders = [m for k in range(3, max_order + 1)
                  for m in _multi_indices(d, k)]
        f = _transported_monomial_rate(pi, model.B, orders)
        vals = panel_integrate(f, 0.0, model.horizon, tol=1e-12,
                               initial_panels=int(max(8, model.horizon)))
        for m, v in zip(orders, vals):
            entries[m] = float(v)

    return CumulantTable(dim=d, max_order=max_order, entries=entries)
