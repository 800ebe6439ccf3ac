"""Exception hierarchy. The three families map onto CLI exit codes 1, 2, 3."""


class DICodeError(Exception):
    """Base class for every error raised by dicodes."""


# Exit code 1

class ConfigError(DICodeError):
    """Experiment configuration could not be parsed or is inconsistent."""


# Input-domain errors

class InvalidChannel(DICodeError, ValueError):
    """A channel triple (A, Sigma, P) violates a model invariant."""


class NonSymmetricCovariance(InvalidChannel):
    pass


class NotPositiveDefinite(InvalidChannel):
    pass


class SingularTransform(InvalidChannel):
    pass


class NonPositivePower(InvalidChannel):
    pass


class DimensionMismatch(DICodeError, ValueError):
    pass


class InvalidAlpha(DICodeError, ValueError):
    pass


class OutOfRange(DICodeError, ValueError):
    pass


# Exit code 2

class InfeasibleParameters(DICodeError):
    """Parameters for which a theorem, bound or construction does not apply."""


class ExponentTooSmall(InfeasibleParameters):
    pass


class NonPositiveExponent(InfeasibleParameters):
    pass


class NonPositiveRadius(InfeasibleParameters):
    pass


class EpsOutOfRange(InfeasibleParameters):
    pass


class Infeasible(InfeasibleParameters):
    pass


class HypothesisViolated(InfeasibleParameters):
    pass


class SizeCapExceeded(InfeasibleParameters):
    pass


class InsufficientCodebook(InfeasibleParameters):
    pass


class BudgetZero(InfeasibleParameters):
    pass


# Exit code 3

class NumericalFailure(DICodeError):
    """A decomposition, integral or series failed to converge."""


class QuadratureNonConvergence(NumericalFailure):
    pass


class SeriesNonConvergence(NumericalFailure):
    pass


class PackingViolation(NumericalFailure):
    """A constructed codebook contradicts a packing guarantee."""
