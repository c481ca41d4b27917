"""Exception types raised across the package."""


class DynRegretError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(DynRegretError):
    """Operands have incompatible shapes."""


class NotSymmetric(DynRegretError):
    """A matrix violated the symmetry invariant."""


class NotPositiveDefinite(DynRegretError):
    """A matrix required to be SPD has a non-positive eigenvalue/pivot."""


class NegativeQuadraticForm(DynRegretError):
    """x'Ax came out significantly negative; A is not PSD."""


class InvalidConstants(DynRegretError):
    """Problem constants (mu, L, eta, contraction factor, ...) out of range."""


class ZetaTooSmall(DynRegretError):
    """Regularization strength below the admissibility threshold."""


class Diverged(DynRegretError):
    """A learner iterate exceeded the divergence guard."""


class NoConvergence(DynRegretError):
    """An inner solver exhausted its iteration cap."""


class EmptyHull(DynRegretError):
    """Function-variation requested over an empty reference set."""


class NotAdmissible(DynRegretError):
    """A bound's preconditions do not hold for this run."""


class RhoOutOfRange(DynRegretError):
    """Geometric rate implied by (c1, c2) is not inside (0, 1)."""


class ConfigInvalid(DynRegretError):
    """Experiment configuration failed validation."""


class UnsupportedEnvironment(DynRegretError):
    """Operation requested on an environment kind it does not support."""
