"""Polynomial eigenstructure of Levy-driven OU semigroups.

The Markov operators act on polynomials through moment kernels

    (K p)(x) = E[ p(A x + Y) ],

with a linear pre-map A and a convolving law Y known through its cumulants.
This module provides

  * a small exact multivariate polynomial calculus (`Poly`),
  * moment/cumulant conversion and Markov convolution of polynomials,
  * the intertwining kernels: `build_lambda` (reduce the diffusion part
    toward a target matrix) and `build_V` (map onto the diagonal reference
    diffusion in drift eigencoordinates),
  * orthonormal-Hermite reference eigenfunctions and the model's polynomial
    eigenfunctions (two independent constructions: triangular kernel
    inversion, and a generating-function expansion),
  * co-eigenfunctions as grid fields (derivative formulas on the invariant
    density) and exactly as polynomials for purely Gaussian models,
  * the polynomial action of the time-t Markov operator and of the
    generator, and biorthogonality inner products (exact and gridded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import density as density_mod
from . import levy, matops
from ._quad import panel_integrate
from .errors import (
    DivergentMoment,
    LevyOuError,
    NotDiagonalizable,
    OrderingViolated,
    SingularPreMap,
)

__all__ = [
    "Poly",
    "compose_linear",
    "moments_from_cumulants",
    "MarkovPolyKernel",
    "convolve_markov",
    "build_lambda",
    "build_V",
    "invert_on_polys",
    "hermite_unit_coeffs",
    "hermite_orthonormal",
    "eigenfunction_Hn",
    "eigenvalue_of_index",
    "coeigenfunction_Gn",
    "coeigenfunction_poly",
    "transition_kernel",
    "poly_semigroup_apply",
    "generator_apply",
    "biorthogonality_inner",
    "isotropic_gaussian_expectation",
    "expectation_from_moments",
]

DENSITY_FLOOR = 1e-12
INVERT_RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# exact polynomial calculus
# ---------------------------------------------------------------------------

class Poly:
    """Multivariate polynomial with float coefficients, keyed by multi-index.

    Immutable by convention: all operations return new instances.  Zero
    coefficients are pruned, so `coeffs` is a sparse exact representation.
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: dict | None = None):
        self.dim = int(dim)
        clean = {}
        for m, c in (coeffs or {}).items():
            c = float(c)
            if c != 0.0:
                m = tuple(int(v) for v in m)
                if len(m) != self.dim or any(v < 0 for v in m):
                    raise ValueError(f"bad multi-index {m} for dim {self.dim}")
                clean[m] = c
        self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls(dim, {})

    @classmethod
    def one(cls, dim: int) -> "Poly":
        return cls(dim, {(0,) * dim: 1.0})

    @classmethod
    def constant(cls, dim: int, c: float) -> "Poly":
        return cls(dim, {(0,) * dim: float(c)})

    @classmethod
    def monomial(cls, m, c: float = 1.0) -> "Poly":
        m = tuple(int(v) for v in m)
        return cls(len(m), {m: float(c)})

    @classmethod
    def linear_form(cls, coeffs_vec) -> "Poly":
        """<v, x> for a coefficient vector v."""
        v = np.asarray(coeffs_vec, dtype=float)
        d = v.shape[0]
        out = {}
        for j in range(d):
            if v[j] != 0.0:
                m = [0] * d
                m[j] = 1
                out[tuple(m)] = float(v[j])
        return cls(d, out)

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(sum(m) for m in self.coeffs)

    def homogeneous_part(self, k: int) -> "Poly":
        return Poly(self.dim, {m: c for m, c in self.coeffs.items()
                               if sum(m) == k})

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def coeff_distance(self, other: "Poly") -> float:
        """Max absolute coefficient difference."""
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeffs.get(m, 0.0) - other.coeffs.get(m, 0.0))
                    for m in keys), default=0.0)

    def to_jsonable(self) -> dict:
        """Portable form: {dim, terms: [{index, coeff}]}, terms sorted
        lexicographically by multi-index."""
        return {"dim": self.dim,
                "terms": [{"index": list(m), "coeff": c}
                          for m, c in sorted(self.coeffs.items())]}

    @classmethod
    def from_jsonable(cls, doc: dict) -> "Poly":
        return cls(doc["dim"], {tuple(t["index"]): t["coeff"]
                                for t in doc["terms"]})

    def __repr__(self):  # pragma: no cover - debugging aid
        terms = sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        body = " + ".join(f"{c:g}*x^{m}" for m, c in terms) or "0"
        return f"Poly[{self.dim}]({body})"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Poly.constant(self.dim, other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return Poly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.dim, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Poly.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Poly(self.dim,
                        {m: c * float(other) for m, c in self.coeffs.items()})
        out: dict = {}
        for ma, ca in self.coeffs.items():
            for mb, cb in other.coeffs.items():
                key = tuple(a + b for a, b in zip(ma, mb))
                out[key] = out.get(key, 0.0) + ca * cb
        return Poly(self.dim, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.one(self.dim)
        for _ in range(int(k)):
            out = out * self
        return out

    # -- calculus ----------------------------------------------------------

    def partial(self, j: int) -> "Poly":
        out = {}
        for m, c in self.coeffs.items():
            if m[j] > 0:
                key = list(m)
                key[j] -= 1
                out[tuple(key)] = out.get(tuple(key), 0.0) + c * m[j]
        return Poly(self.dim, out)

    def deriv(self, m) -> "Poly":
        out = self
        for j, k in enumerate(m):
            for _ in range(int(k)):
                out = out.partial(j)
                if not out.coeffs:
                    return out
        return out

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points of shape (..., d) (or (d,) for one point)."""
        x = np.asarray(x, dtype=float)
        squeeze = False
        if x.ndim == 1:
            x = x[None, :]
            squeeze = True
        acc = np.zeros(x.shape[:-1])
        for m, c in self.coeffs.items():
            term = np.full(x.shape[:-1], c)
            for j, k in enumerate(m):
                if k:
                    term = term * x[..., j] ** k
            acc = acc + term
        return acc[0] if squeeze else acc


def compose_linear(p: Poly, A) -> Poly:
    """The polynomial x -> p(A x)."""
    A = np.asarray(A, dtype=float)
    d = p.dim
    if A.shape != (d, d):
        raise ValueError("matrix shape does not match polynomial dimension")
    rows = [Poly.linear_form(A[j]) for j in range(d)]
    powers: list[dict[int, Poly]] = [{0: Poly.one(d)} for _ in range(d)]

    def row_power(j: int, k: int) -> Poly:
        table = powers[j]
        while k not in table:
            top = max(table)
            table[top + 1] = table[top] * rows[j]
        return table[k]

    out = Poly.zero(d)
    for m, c in p.coeffs.items():
        term = Poly.constant(d, c)
        for j, k in enumerate(m):
            if k:
                term = term * row_power(j, k)
        out = out + term
    return out


# ---------------------------------------------------------------------------
# moments from cumulants
# ---------------------------------------------------------------------------

def _multi_indices_upto(d: int, order: int):
    """All multi-indices of total order 0..order, in graded order."""
    for k in range(order + 1):
        yield from levy._multi_indices(d, k)


def _sub_indices(alpha):
    """All beta with 0 <= beta <= alpha componentwise."""
    ranges = [range(a + 1) for a in alpha]
    out = [()]
    for r in ranges:
        out = [t + (b,) for t in out for b in r]
    return out


def _factorial_multi(m) -> float:
    return float(math.prod(math.factorial(int(v)) for v in m))


def moments_from_cumulants(table: levy.CumulantTable, max_order: int) -> dict:
    """Raw moments m_gamma for all |gamma| <= max_order from a cumulant table.

    Uses the graded recursion obtained by differentiating M = exp(K): with i
    the first active coordinate of gamma and alpha = gamma - e_i,

        m_gamma = sum_{beta <= alpha} (prod_j C(alpha_j, beta_j))
                    * kappa_{beta + e_i} * m_{alpha - beta},

    accumulated with exact compensated summation.
    """
    if max_order > table.max_order:
        raise levy.IncompleteTable(
            f"moments to order {max_order} need cumulants to the same order; "
            f"table stops at {table.max_order}"
        )
    d = table.dim
    moments: dict = {(0,) * d: 1.0}
    for gamma in _multi_indices_upto(d, max_order):
        if sum(gamma) == 0:
            continue
        i = next(j for j, v in enumerate(gamma) if v > 0)
        alpha = list(gamma)
        alpha[i] -= 1
        alpha = tuple(alpha)
        terms = []
        for beta in _sub_indices(alpha):
            binom = math.prod(math.comb(a, b) for a, b in zip(alpha, beta))
            kappa_idx = list(beta)
            kappa_idx[i] += 1
            kap = table[tuple(kappa_idx)]
            if kap == 0.0:
                continue
            rest = tuple(a - b for a, b in zip(alpha, beta))
            terms.append(binom * kap * moments[rest])
        moments[gamma] = math.fsum(terms)
    return moments


def expectation_from_moments(p: Poly, moments: dict) -> float:
    """E[p(Y)] for a law given by its raw moments."""
    return math.fsum(c * moments[m] for m, c in p.coeffs.items())


def isotropic_gaussian_expectation(p: Poly, variance: float) -> float:
    """E[p(Z)] for Z ~ N(0, variance * I), via the exact even-moment formula
    E[Z^alpha] = prod_j variance^{alpha_j/2} (alpha_j - 1)!! (even alpha only).
    """
    terms = []
    for m, c in p.coeffs.items():
        if any(v % 2 for v in m):
            continue
        val = c
        for v in m:
            val *= variance ** (v // 2) * float(math.prod(range(1, v, 2)))
        terms.append(val)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Markov kernels on polynomials
# ---------------------------------------------------------------------------

@dataclass
class MarkovPolyKernel:
    """Kernel p -> E[p(A x + Y)] with Y specified by a cumulant builder.

    `cumulant_builder(max_order)` must return a CumulantTable complete to that
    order (raising DivergentMoment where the law has no such moments); tables
    and derived raw moments are cached at the largest order built.
    """

    dim: int
    pre_map: np.ndarray
    cumulant_builder: Callable[[int], levy.CumulantTable]
    label: str = ""
    _table: levy.CumulantTable | None = field(default=None, repr=False)
    _moments: dict | None = field(default=None, repr=False)
    _moment_order: int = field(default=-1, repr=False)

    def cumulants(self, max_order: int) -> levy.CumulantTable:
        if self._table is None or self._table.max_order < max_order:
            self._table = self.cumulant_builder(max_order)
        return self._table

    def moments(self, max_order: int) -> dict:
        if self._moment_order < max_order:
            self._moments = moments_from_cumulants(self.cumulants(max_order),
                                                   max_order)
            self._moment_order = max_order
        return self._moments

    def __call__(self, p: Poly) -> Poly:
        return convolve_markov(self, p)


def convolve_markov(kernel: MarkovPolyKernel, p: Poly) -> Poly:
    """Apply the kernel to a polynomial exactly.

    E[p(Ax + Y)] = sum_beta E[Y^beta]/beta! * (d^beta p)(Ax), a finite sum
    since p is polynomial; degree never increases.
    """
    deg = p.degree
    if deg <= 0:
        return p
    moments = kernel.moments(deg)
    shifted = Poly.zero(p.dim)
    for beta in _multi_indices_upto(p.dim, deg):
        mom = moments[beta]
        if mom == 0.0:
            continue
        dp = p.deriv(beta)
        if not dp.coeffs:
            continue
        shifted = shifted + dp * (mom / _factorial_multi(beta))
    return compose_linear(shifted, kernel.pre_map)


def build_lambda(model: levy.OuModel, Q_target) -> MarkovPolyKernel:
    """Intertwining kernel from this model onto the model with diffusion
    matrix `Q_target` (same drift, same jumps): Lambda P_t = P~_t Lambda.

    The kernel convolves with the law whose cumulants match the invariant law
    except that the order-2 block is reduced by the target model's stationary
    Gramian.  That reduction must stay positive semidefinite — the stationary
    Gramians must be ordered — otherwise OrderingViolated is raised.
    `Q_target = 0` gives the kernel that convolves with the invariant law
    itself (the classical one-dimensional intertwining with the degenerate
    pure-jump model).
    """
    d = model.d
    if Q_target is None:
        Qt = np.zeros((d, d))
    else:
        Qt = np.asarray(Q_target, dtype=float)
        if Qt.ndim == 0:
            Qt = float(Qt) * np.eye(d)
    if Qt.shape != (d, d):
        raise ValueError("target diffusion matrix has wrong shape")
    if np.max(np.abs(Qt - Qt.T)) > 1e-12 * (1.0 + np.max(np.abs(Qt))):
        raise ValueError("target diffusion matrix must be symmetric")
    scale = 1.0 + float(np.max(np.abs(model.Q_inf)))
    if np.any(np.linalg.eigvalsh(0.5 * (Qt + Qt.T)) < -1e-12 * scale):
        raise ValueError("target diffusion matrix must be PSD")
    Qt_inf = matops.qinf(0.5 * (Qt + Qt.T), model.B)
    gap = model.Q_inf - Qt_inf
    if np.min(np.linalg.eigvalsh(0.5 * (gap + gap.T))) < -1e-12 * scale:
        raise OrderingViolated(
            "target stationary Gramian exceeds the source Gramian; the "
            "intertwining kernel would need a negative-variance factor"
        )

    def builder(max_order: int) -> levy.CumulantTable:
        base = model.cumulants(max(max_order, 2))
        return base.with_covariance(base.covariance() - Qt_inf)

    return MarkovPolyKernel(dim=d, pre_map=np.eye(d),
                            cumulant_builder=builder,
                            label="lambda_intertwiner")


def _real_diagonal_data(model: levy.OuModel):
    """Eigen data (M, rates, s2) for models whose drift diagonalizes over R."""
    sd = model.spectral
    if not sd.diagonalizable or not sd.real_spectrum:
        raise NotDiagonalizable(
            "the drift must be diagonalizable with real spectrum to map onto "
            "the diagonal reference diffusion"
        )
    return sd


def build_V(model: levy.OuModel) -> MarkovPolyKernel:
    """Intertwining kernel onto the reference diagonal diffusion:
    V P_t = P^ref_t V, with V p(z) = E[p(M^{-1} z + Y)].

    Here M maps to drift eigencoordinates and the reference model is the
    diffusion with drift diag(-rates) and stationary variance s^2 per
    coordinate (s^2 = the smallest eigencoordinate stationary variance).  The
    convolving law Y keeps every cumulant of the invariant law except that
    its covariance is reduced by s^2 M^{-1} M^{-T} — exactly the image of the
    reference stationary covariance, so the reduction is PSD by minimality
    of s^2.
    """
    sd = _real_diagonal_data(model)
    Minv = sd.from_eigenbasis
    s2 = sd.min_eigencoord_variance
    reduction = s2 * (Minv @ Minv.T)

    def builder(max_order: int) -> levy.CumulantTable:
        base = model.cumulants(max(max_order, 2))
        return base.with_covariance(base.covariance() - reduction)

    return MarkovPolyKernel(dim=model.d, pre_map=Minv.copy(),
                            cumulant_builder=builder,
                            label="reference_intertwiner")


def invert_on_polys(kernel: MarkovPolyKernel, target: Poly,
                    tol: float = INVERT_RESIDUAL_TOL) -> Poly:
    """Solve kernel(q) = target for q, exactly, degree by degree.

    The kernel is triangular in total degree with leading action
    q_k -> q_k(A x), so back-substitution from the top degree terminates in
    deg(target)+1 steps.  Raises SingularPreMap when A is not invertible and
    LevyOuError if the final residual is not negligible.
    """
    A = kernel.pre_map
    svals = np.linalg.svd(A, compute_uv=False)
    if svals[-1] <= matops.RANK_RTOL * max(1.0, svals[0]):
        raise SingularPreMap(
            "kernel pre-map is singular; the polynomial action cannot be "
            "inverted"
        )
    Ainv = np.linalg.inv(A)
    q = Poly.zero(target.dim)
    for k in range(max(target.degree, 0), -1, -1):
        residual = target - convolve_markov(kernel, q)
        q = q + compose_linear(residual.homogeneous_part(k), Ainv)
    residual = target - convolve_markov(kernel, q)
    # Backward-error scale: roundoff in the back-substitution is proportional
    # to the size of the computed solution, not of the (often orthonormal,
    # hence O(1)) target, and the solution coefficients grow quickly with
    # degree when the drift mixes coordinates with very different rates.
    scale = 1.0 + max(target.max_abs_coeff(), q.max_abs_coeff())
    if residual.max_abs_coeff() > tol * scale:
        raise LevyOuError(
            f"polynomial inversion residual {residual.max_abs_coeff():.3e} "
            f"exceeds {tol:g} relative to solution scale {scale:.3e}"
        )
    return q


# ---------------------------------------------------------------------------
# Hermite reference eigenfunctions
# ---------------------------------------------------------------------------

def hermite_unit_coeffs(k: int) -> list:
    """Coefficient lists of the orthonormal Hermite polynomials for N(0,1).

    Returns coefficient arrays (index = power) for he^_0..he^_k built from
    he^_{k+1}(u) = (u he^_k(u) - sqrt(k) he^_{k-1}(u)) / sqrt(k+1); these are
    orthonormal under the standard normal law.
    """
    polys = [[1.0]]
    if k >= 1:
        polys.append([0.0, 1.0])
    for j in range(1, k):
        prev, cur = polys[j - 1], polys[j]
        nxt = [0.0] * (j + 2)
        for p, c in enumerate(cur):
            nxt[p + 1] += c
        for p, c in enumerate(prev):
            nxt[p] -= math.sqrt(j) * c
        polys.append([c / math.sqrt(j + 1) for c in nxt])
    return polys[: k + 1]


def hermite_orthonormal(n, rates, rate_variance_product: float) -> Poly:
    """Reference eigenfunction h_n for the diagonal diffusion model.

    h_n(z) = prod_j phi_{n_j}(z_j / s) with phi_k = (-1)^k he^_k and a single
    scale s shared by all coordinates, s^2 = rate_variance_product divided by
    the smallest decay rate.  (`rates` fixes the coordinate order and the
    smallest rate; only that smallest rate enters the scale — a per-coordinate
    scale would break orthonormality under the reference stationary law,
    which is N(0, s^2 I).)
    """
    n = tuple(int(v) for v in n)
    rates = np.asarray(rates, dtype=float)
    if len(n) != rates.shape[0]:
        raise ValueError("index length does not match the rate vector")
    if np.any(rates <= 0):
        raise ValueError("decay rates must be positive")
    s2 = float(rate_variance_product) / float(np.min(rates))
    if s2 <= 0:
        raise ValueError("rate-variance product must be positive")
    s = math.sqrt(s2)
    tables = hermite_unit_coeffs(max(n) if n else 0)
    d = len(n)
    out = Poly.one(d)
    for j, k in enumerate(n):
        coeffs = tables[k]
        uni = Poly.zero(d)
        for p, c in enumerate(coeffs):
            if c != 0.0:
                sign = -1.0 if k % 2 else 1.0
                m = [0] * d
                m[j] = p
                uni = uni + Poly(d, {tuple(m): sign * c / s ** p})
        out = out * uni
    return out


# ---------------------------------------------------------------------------
# z-series with polynomial coefficients (generating-function engine)
# ---------------------------------------------------------------------------

def _zseries_mul(a: dict, b: dict, d: int, order: int) -> dict:
    out: dict = {}
    for ma, pa in a.items():
        for mb, pb in b.items():
            key = tuple(x + y for x, y in zip(ma, mb))
            if sum(key) > order:
                continue
            prod = pa * pb
            if key in out:
                out[key] = out[key] + prod
            else:
                out[key] = prod
    return out


def _zseries_exp(S: dict, d: int, xdim: int, order: int) -> dict:
    """exp of a z-series with Poly coefficients and no constant term."""
    zero_key = (0,) * d
    if zero_key in S and S[zero_key].max_abs_coeff() > 0:
        raise ValueError("series exponential requires a vanishing constant term")
    result = {zero_key: Poly.one(xdim)}
    term = {zero_key: Poly.one(xdim)}
    for k in range(1, order + 1):
        term = _zseries_mul(term, S, d, order)
        term = {m: p * (1.0 / k) for m, p in term.items()}
        for m, p in term.items():
            result[m] = result.get(m, Poly.zero(xdim)) + p
    return result


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------

def eigenvalue_of_index(model: levy.OuModel, n, t: float) -> float:
    """Eigenvalue of the time-t operator on the eigenfunction of index n:
    exp(-t sum_j n_j rate_j)."""
    sd = _real_diagonal_data(model)
    n = np.asarray(n, dtype=float)
    return float(np.exp(-float(t) * float(n @ sd.decay_rates)))


def _eigenfunction_series(model: levy.OuModel, n) -> Poly:
    """Generating-function construction of the polynomial eigenfunction.

    Expands exp( -<M x, z>/s - K_mu(-M^T z / s) ) in z; the coefficient of
    z^n times sqrt(n!) is the eigenfunction.  K_mu is the cumulant function
    of the invariant law, needed to order |n|.
    """
    sd = _real_diagonal_data(model)
    n = tuple(int(v) for v in n)
    d = model.d
    N = sum(n)
    if N == 0:
        return Poly.one(d)
    M = sd.to_eigenbasis
    s = sd.hermite_scale
    table = model.cumulants(N)

    S: dict = {}
    for j in range(d):
        ej = tuple(1 if i == j else 0 for i in range(d))
        S[ej] = Poly.linear_form(-M[j] / s)

    # w_j(z) = -(M^T z)_j / s as scalar z-linear series
    w = []
    for j in range(d):
        wj = {}
        for k in range(d):
            if M[k, j] != 0.0:
                ek = tuple(1 if i == k else 0 for i in range(d))
                wj[ek] = Poly.constant(d, -M[k, j] / s)
        w.append(wj)

    def w_power(m) -> dict:
        out = {(0,) * d: Poly.one(d)}
        for j, k in enumerate(m):
            for _ in range(k):
                out = _zseries_mul(out, w[j], d, N)
        return out

    for order in range(1, N + 1):
        for m in levy._multi_indices(d, order):
            kap = table[m]
            if kap == 0.0:
                continue
            wm = w_power(m)
            scale = -kap / _factorial_multi(m)
            for zkey, poly in wm.items():
                add = poly * scale
                S[zkey] = S.get(zkey, Poly.zero(d)) + add

    E = _zseries_exp(S, d, d, N)
    coeff = E.get(n, Poly.zero(d))
    return coeff * math.sqrt(_factorial_multi(n))


def eigenfunction_Hn(model: levy.OuModel, n, method: str = "kernel") -> Poly:
    """Polynomial eigenfunction of index n: P_t H_n = e^{-t <n, rates>} H_n.

    method="kernel" (primary): solve V H_n = h_n by triangular inversion of
    the reference intertwiner.  method="series": independent construction
    from the exponential generating function; the two agree to roundoff and
    are compared in the acceptance suite.
    """
    n = tuple(int(v) for v in n)
    if len(n) != model.d or any(v < 0 for v in n):
        raise ValueError("bad eigenfunction index")
    if method == "series":
        return _eigenfunction_series(model, n)
    if method != "kernel":
        raise ValueError("method must be 'kernel' or 'series'")

    def build():
        sd = _real_diagonal_data(model)
        h = hermite_orthonormal(n, sd.decay_rates, sd.rate_variance_product)
        V = model.cache(("V",), lambda: build_V(model))
        return invert_on_polys(V, h)

    return model.cache(("Hn", n), build)


# ---------------------------------------------------------------------------
# co-eigenfunctions
# ---------------------------------------------------------------------------

def coeigenfunction_Gn(model: levy.OuModel, n, grid: density_mod.GridSpec,
                       form: str = "adjoint") -> density_mod.DensityField:
    """Co-eigenfunction of index n as a grid field.

    form="adjoint" (the exact construction): G_n = s^{|n|}/sqrt(n!) *
    (D^n mu)/mu with the directional derivatives D_j = sum_k (M^{-1})_{kj}
    d_k along the columns of M^{-1}; its Fourier multiplier is
    prod_j (-i (M^{-T} xi)_j)^{n_j}.  These satisfy the time-reversed
    eigenvalue relation and biorthogonality with the polynomial
    eigenfunctions.

    form="plain": the bare derivative formula (-1)^{|n|} d^n mu /
    (sqrt(n!) mu), which is proportional to the adjoint form exactly when
    the eigencoordinate map is diagonal; the proportionality constant is a
    grid-independent diagnostic.

    Values are set to 0 where the invariant density falls below 1e-12.
    """
    n = tuple(int(v) for v in n)
    if len(n) != model.d or any(v < 0 for v in n):
        raise ValueError("bad co-eigenfunction index")
    mu = density_mod.invariant_density(model, grid)
    xi = density_mod.frequency_mesh(grid)
    cf = np.exp(levy.psi_inf(model, xi))
    if form == "adjoint":
        sd = _real_diagonal_data(model)
        MinvT = sd.from_eigenbasis.T
        eta = np.tensordot(xi, MinvT.T, axes=([-1], [0]))  # (M^{-T} xi)_j
        factor = np.ones(xi.shape[:-1], dtype=complex)
        for j, k in enumerate(n):
            if k:
                factor = factor * (-1j * eta[..., j]) ** k
        scale = sd.hermite_scale ** sum(n) / math.sqrt(_factorial_multi(n))
    elif form == "plain":
        factor = np.ones(xi.shape[:-1], dtype=complex)
        for j, k in enumerate(n):
            if k:
                factor = factor * (-1j * xi[..., j]) ** k
        scale = (-1.0) ** sum(n) / math.sqrt(_factorial_multi(n))
    else:
        raise ValueError("form must be 'adjoint' or 'plain'")
    dcf = factor * cf
    density_mod._check_frequency_decay(grid, dcf,
                                       f"co-eigenfunction {n} ({form})")
    deriv_vals = density_mod.synthesize_density(grid, dcf)
    good = mu.values > DENSITY_FLOOR
    vals = np.zeros_like(deriv_vals)
    vals[good] = scale * deriv_vals[good] / mu.values[good]
    return density_mod.DensityField(grid, vals,
                                    label=f"coeigenfunction_{form}_{n}")


def coeigenfunction_poly(model: levy.OuModel, n) -> Poly:
    """Exact polynomial form of the adjoint co-eigenfunction, for models with
    no jump part (Gaussian invariant law only).

    From the Gaussian ratio mu(y + s M^{-1} z)/mu(y) =
    exp( -s <M^{-T} C y, z> - (s^2/2) <M^{-T} C M^{-1} z, z> ), C = Sigma^{-1},
    expanded in z; the z^n coefficient times sqrt(n!) is G_n.
    """
    if not isinstance(model.pi, levy.NullJumps):
        raise DivergentMoment(
            "closed-form polynomial co-eigenfunctions exist only for purely "
            "Gaussian models; use the grid form"
        )
    sd = _real_diagonal_data(model)
    n = tuple(int(v) for v in n)
    d = model.d
    N = sum(n)
    if N == 0:
        return Poly.one(d)
    s = sd.hermite_scale
    Minv = sd.from_eigenbasis
    C = np.linalg.inv(model.Q_inf)
    lin = -s * (Minv.T @ C)       # row j gives coeff vector of z_j term
    quad = -0.5 * s * s * (Minv.T @ C @ Minv)

    S: dict = {}
    for j in range(d):
        ej = tuple(1 if i == j else 0 for i in range(d))
        S[ej] = Poly.linear_form(lin[j])
    for j in range(d):
        for k in range(j, d):
            key = tuple((1 if i == j else 0) + (1 if i == k else 0)
                        for i in range(d))
            val = quad[j, k] if j == k else 2.0 * quad[j, k]
            if val != 0.0:
                S[key] = S.get(key, Poly.zero(d)) + Poly.constant(d, val)

    E = _zseries_exp(S, d, d, N)
    return E.get(n, Poly.zero(d)) * math.sqrt(_factorial_multi(n))


# ---------------------------------------------------------------------------
# semigroup and generator action on polynomials
# ---------------------------------------------------------------------------

def transition_kernel(Q, B, pi: levy.JumpSpec, t: float) -> MarkovPolyKernel:
    """Kernel of the time-t operator for the triple (Q, B, Pi):
    P_t p (x) = E[p(e^{tB} x + Z_t)].

    Built from raw data so that degenerate diffusion parts (Q = 0, used as
    intertwining targets) are allowed; no stationarity or nondegeneracy is
    required at finite t.
    """
    Q = np.asarray(Q, dtype=float)
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    t = float(t)
    Et = matops.expm(B, t)

    def builder(max_order: int) -> levy.CumulantTable:
        entries: dict = {}
        if max_order >= 1:
            m1p = levy.jump_mean_outside_unit_ball(pi, d)
            k1 = np.linalg.solve(B, (Et - np.eye(d)) @ m1p)
            for i in range(d):
                m = [0] * d
                m[i] = 1
                entries[tuple(m)] = float(k1[i])
        if max_order >= 2:
            K2 = matops.gram_qt(Q, B, t)
            if not isinstance(pi, levy.NullJumps):
                S2 = levy.jump_second_moment(pi, d)
                K2 = K2 + matops.gram_qt(S2, B, t)
            for i in range(d):
                for j in range(i, d):
                    m = [0] * d
                    m[i] += 1
                    m[j] += 1
                    entries[tuple(m)] = float(K2[i, j])
        if max_order >= 3 and not isinstance(pi, levy.NullJumps):
            if isinstance(pi, levy.AlphaStableJumps):
                raise DivergentMoment(
                    "the stable driving noise has no moments of order >= 2; "
                    "the polynomial semigroup action is undefined"
                )
            orders = [m for k in range(3, max_order + 1)
                      for m in levy._multi_indices(d, k)]
            f = levy._transported_monomial_rate(pi, B, orders)
            vals = panel_integrate(f, 0.0, t, tol=1e-12,
                                   initial_panels=int(max(8, t)))
            for m, v in zip(orders, vals):
                entries[m] = float(v)
        return levy.CumulantTable(dim=d, max_order=max_order, entries=entries)

    return MarkovPolyKernel(dim=d, pre_map=Et, cumulant_builder=builder,
                            label=f"markov_t{t:g}")


def poly_semigroup_apply(model: levy.OuModel, p: Poly, t: float) -> Poly:
    """Exact action of the time-t Markov operator on a polynomial."""
    t = float(t)
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return p
    kernel = model.cache(
        ("zt_kernel", t),
        lambda: transition_kernel(model.Q, model.B, model.pi, t))
    return convolve_markov(kernel, p)


def generator_apply(model: levy.OuModel, p: Poly) -> Poly:
    """Exact action of the generator on a polynomial:

    A p = (1/2) tr(Q grad^2 p) + <Bx, grad p> + <m1_out, grad p>
          + sum_{|m| >= 2} Pi_m (d^m p)/m!,

    where m1_out is the uncompensated large-jump mean rate and Pi_m the plain
    jump moments (both finite only for finite-activity jump parts with enough
    moments; DivergentMoment propagates otherwise).
    """
    d = model.d
    out = Poly.zero(d)
    for i in range(d):
        for j in range(d):
            if model.Q[i, j] != 0.0:
                out = out + p.partial(i).partial(j) * (0.5 * model.Q[i, j])
    for i in range(d):
        dip = p.partial(i)
        if not dip.coeffs:
            continue
        drift = Poly.linear_form(model.B[i])  # (Bx)_i
        out = out + drift * dip
    if not isinstance(model.pi, levy.NullJumps):
        m1p = levy.jump_mean_outside_unit_ball(model.pi, d)
        for i in range(d):
            if m1p[i] != 0.0:
                out = out + p.partial(i) * float(m1p[i])
        deg = p.degree
        for order in range(2, max(deg, 1) + 1):
            for m in levy._multi_indices(d, order):
                dp = p.deriv(m)
                if not dp.coeffs:
                    continue
                pim = levy.jump_monomial_moment(model.pi, m)
                if pim != 0.0:
                    out = out + dp * (pim / _factorial_multi(m))
    return out


# ---------------------------------------------------------------------------
# biorthogonality
# ---------------------------------------------------------------------------

def biorthogonality_inner(model: levy.OuModel, n, m,
                          grid: density_mod.GridSpec | None = None) -> float:
    """Inner product <H_n, G_m> under the invariant law.

    Without a grid: exact route — push H_n through the reference intertwiner
    (computed fresh by Markov convolution, not assumed equal to h_n) and pair
    with h_m under the reference stationary law N(0, s^2 I) by the even-moment
    formula.  With a grid: direct quadrature of H_n * G_m * mu over the grid,
    with G_m in its adjoint form.
    """
    n = tuple(int(v) for v in n)
    m = tuple(int(v) for v in m)
    if grid is None:
        sd = _real_diagonal_data(model)
        V = model.cache(("V",), lambda: build_V(model))
        Hn = eigenfunction_Hn(model, n)
        VHn = convolve_markov(V, Hn)
        hm = hermite_orthonormal(m, sd.decay_rates, sd.rate_variance_product)
        return isotropic_gaussian_expectation(VHn * hm,
                                              sd.min_eigencoord_variance)
    Hn = eigenfunction_Hn(model, n)
    Gm = coeigenfunction_Gn(model, m, grid, form="adjoint")
    mu = density_mod.invariant_density(model, grid)
    vals = Hn(grid.mesh()) * Gm.values * mu.values
    return float(np.sum(vals) * grid.node_weight())
