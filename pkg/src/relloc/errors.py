"""Exception hierarchy shared across the package."""


class RellocError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RellocError, ValueError):
    """A numeric or structural argument is outside its allowed range."""


class GraphConstructionError(RellocError):
    """A graph could not be built (e.g. disconnected after all retries)."""


class StepSizeError(InvalidParameterError):
    """The step size violates tau <= 1/(d_max + gamma)."""


class NumericalError(RellocError, ArithmeticError):
    """A linear-algebra routine failed or produced an out-of-tolerance result."""


class ConfigError(InvalidParameterError):
    """An experiment configuration could not be parsed or validated."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
