"""Exception hierarchy shared by all modules."""


class FracLTError(Exception):
    """Base class for library errors."""


class InvalidParameterError(FracLTError, ValueError):
    pass


class DimensionMismatchError(InvalidParameterError):
    pass


class ParseError(FracLTError, ValueError):
    pass


class PreconditionError(FracLTError):
    pass


class EvaluationError(FracLTError):
    """A field returned a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SingularityError(FracLTError):
    pass


class DivergenceError(FracLTError):
    pass


class NonTerminationError(FracLTError):
    """Subdivision hit max_depth while a cube still carried too much mass."""

    def __init__(self, message, cube=None):
        super().__init__(message)
        self.cube = cube


class CapabilityError(FracLTError):
    pass


class MissingDerivativeError(CapabilityError):
    pass


class NumericalConsistencyError(FracLTError):
    pass


class PartitionOfUnityError(FracLTError):
    pass


class FitError(FracLTError):
    pass


class InternalError(FracLTError):
    pass
