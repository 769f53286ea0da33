"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class VGMMError(Exception):
    exit_code = 1


class ModelValidationError(VGMMError, ValueError):
    """Malformed input: bad shapes, weights, schema violations."""

    exit_code = 2


class DimensionMismatchError(ModelValidationError):
    pass


class ZeroMassError(ModelValidationError):
    pass


class UnbalancedInputError(ModelValidationError):
    pass


class MarginalMismatchError(ModelValidationError):
    pass


class NumericalError(VGMMError, ArithmeticError):
    exit_code = 4


class NotPSDError(NumericalError):
    pass


class SingularCovarianceError(NumericalError):
    pass


class InfeasibleError(VGMMError):
    """Raised where an Infeasible outcome cannot be returned as a value."""

    exit_code = 3
