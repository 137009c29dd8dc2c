"""Exception types shared across the package."""


class SCRError(Exception):
    """Base class. ``stage`` names the pipeline stage that raised, if any."""

    stage: str | None = None


class InvalidInputError(SCRError, ValueError):
    """Arguments violate an operation's preconditions."""


class NumericalFailureError(SCRError, ArithmeticError):
    """A numerical routine did not reach its accuracy target."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ResourceLimitError(SCRError, RuntimeError):
    """A construction would exceed the configured size limits."""

    def __init__(self, message: str, quantity: str | None = None, value: int | None = None):
        super().__init__(message)
        self.quantity = quantity
        self.value = value


class IngestionError(InvalidInputError):
    """A dataset file could not be read. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
