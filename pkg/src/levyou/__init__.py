"""Spectral and distributional computations for Levy-driven
Ornstein-Uhlenbeck semigroups.

The package computes, for a model (Q, B, Pi) — diffusion matrix, stable
drift, Levy jump measure — the objects its semigroup carries: characteristic
exponents and transition characteristic functions, invariant densities by
Fourier synthesis, polynomial eigenfunctions with their co-eigenfunction
partners, intertwining Markov kernels, eigenvalue lattices with multiplicity
tables, Mehler-type kernel expansions, compactness diagnostics, and exact or
Euler Monte Carlo samplers — all behind one validated model type and a CLI.
"""

from .density import (DensityField, GridSpec, characteristic_values,
                      default_grid, density_derivative, frequency_mesh,
                      interpolate_field, invariant_density,
                      semigroup_apply_grid, synthesize_density,
                      transition_density)
from .errors import *  # noqa: F401,F403 - the error taxonomy is the API
from .errors import LevyOuError
from .levy import (AlphaStableJumps, CompoundPoissonDensityJumps,
                   CumulantTable, FiniteAtomicJumps, NullJumps, OuModel,
                   cumulants_mu, measure_diagnostics, phi, pi_inf_moment,
                   psi, psi_inf, psi_t)
from .matops import (SpectralData, expm, gram_qt, kalman_index, qinf,
                     spectral_abscissa, spectral_data)
from .polyspec import (MarkovPolyKernel, Poly, biorthogonality_inner,
                       build_V, build_lambda, coeigenfunction_Gn,
                       coeigenfunction_poly, convolve_markov,
                       eigenfunction_Hn, eigenvalue_of_index,
                       generator_apply, invert_on_polys,
                       poly_semigroup_apply, transition_kernel)
from .simulate import (SamplerConfig, empirical_cf, mc_semigroup_apply,
                       sample_transition, write_samples)
from .spectrum import (CompactnessReport, SpectralReport,
                       compactness_diagnostic, estimate_expansion_threshold,
                       gaussian_transition_value, isospectrality_check,
                       lattice, mehler_kernel, multiplicities,
                       spectral_apply, spectral_report)
from .verify import registry, run_all

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model + exponents
    "OuModel", "NullJumps", "FiniteAtomicJumps",
    "CompoundPoissonDensityJumps", "AlphaStableJumps", "phi", "psi",
    "psi_t", "psi_inf", "measure_diagnostics", "pi_inf_moment",
    "cumulants_mu", "CumulantTable",
    # matrix layer
    "expm", "gram_qt", "qinf", "kalman_index", "spectral_abscissa",
    "spectral_data", "SpectralData",
    # densities
    "GridSpec", "DensityField", "default_grid", "invariant_density",
    "density_derivative", "transition_density", "semigroup_apply_grid",
    "interpolate_field", "characteristic_values", "synthesize_density",
    "frequency_mesh",
    # polynomial spectral theory
    "Poly", "MarkovPolyKernel", "build_lambda", "build_V",
    "convolve_markov", "invert_on_polys", "eigenfunction_Hn",
    "coeigenfunction_Gn", "coeigenfunction_poly", "eigenvalue_of_index",
    "poly_semigroup_apply", "generator_apply", "transition_kernel",
    "biorthogonality_inner",
    # spectrum
    "lattice", "multiplicities", "spectral_report", "SpectralReport",
    "isospectrality_check", "spectral_apply", "mehler_kernel",
    "gaussian_transition_value", "compactness_diagnostic",
    "CompactnessReport", "estimate_expansion_threshold",
    # sampling
    "SamplerConfig", "sample_transition", "empirical_cf",
    "mc_semigroup_apply", "write_samples",
    # verification
    "registry", "run_all",
    # errors
    "LevyOuError",
]
