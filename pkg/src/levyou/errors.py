"""Structured error taxonomy.

Every failure mode that callers are expected to handle is a distinct exception
type deriving from :class:`LevyOuError`, so that orchestration code (and the
CLI) can map failures to diagnostics without string matching.
"""

__all__ = [
    "LevyOuError",
    "NonConvergedQuadrature",
    "UnstableDrift",
    "HypoellipticityFailure",
    "QuadratureFailure",
    "DivergentMoment",
    "GridTooCoarse",
    "InterpolationOutOfRange",
    "IncompleteTable",
    "OrderingViolated",
    "NotDiagonalizable",
    "SingularPreMap",
    "CutoffTooLarge",
    "CutoffTooSmall",
]


class LevyOuError(Exception):
    """Base class for all structured errors raised by this package."""


class NonConvergedQuadrature(LevyOuError):
    """Adaptive panel refinement failed to reach the requested tolerance."""


class UnstableDrift(LevyOuError):
    """The drift matrix has spectral abscissa >= 0; no invariant regime exists."""


class HypoellipticityFailure(LevyOuError):
    """The controllability rank never reaches full dimension; covariances stay singular."""


class QuadratureFailure(LevyOuError):
    """A frequency- or jump-integral evaluation failed to converge."""


class DivergentMoment(LevyOuError):
    """A requested moment or cumulant does not exist for the given jump measure."""


class GridTooCoarse(LevyOuError):
    """Grid resolution or extent is insufficient for the requested accuracy."""


class InterpolationOutOfRange(LevyOuError):
    """An evaluation point left the grid's interpolation domain."""


class IncompleteTable(LevyOuError):
    """A cumulant/moment table does not extend to the requested order."""


class OrderingViolated(LevyOuError):
    """A required positive-semidefinite ordering between covariances fails."""


class NotDiagonalizable(LevyOuError):
    """The drift matrix is not diagonalizable with real spectrum where required."""


class SingularPreMap(LevyOuError):
    """The linear pre-map of a convolution operator is singular."""


class CutoffTooLarge(LevyOuError):
    """A lattice enumeration request exceeds the index budget."""


class CutoffTooSmall(LevyOuError):
    """A degree cutoff is too small for kernel dimensions to stabilize."""
