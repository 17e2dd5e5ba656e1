"""Exception hierarchy shared by every module of the package."""


class RnnRealError(Exception):
    """Base class for all errors raised by rnnreal."""


class DimensionError(RnnRealError, ValueError):
    """Operands live in polynomial rings with different variable counts."""


class ArgumentError(RnnRealError, ValueError):
    """An argument is outside the domain of an operation."""


class EvaluationError(RnnRealError, ArithmeticError):
    """A denominator vanished where a value was requested."""

    def __init__(self, message, denominator=None, point=None):
        super().__init__(message)
        self.denominator = denominator
        self.point = point


class BlowupError(RnnRealError, OverflowError):
    """A symbolic result exceeded the configured degree cap."""


class ConfigurationError(RnnRealError, ValueError):
    """A system or activation lacks data required by a construction."""


class ParseError(RnnRealError, ValueError):
    """Malformed spec file or polynomial text."""


class SimulationError(RnnRealError, RuntimeError):
    """Base class for numeric integration failures."""

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class DivergenceError(SimulationError):
    """The integrated state became non-finite."""


class SingularityError(SimulationError):
    """A denominator dropped below the guard threshold during integration."""
