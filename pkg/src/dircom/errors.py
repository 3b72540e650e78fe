"""Exception types shared across the package."""


class DircomError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DircomError, ValueError):
    """Invalid input: bad parameters, malformed structures, broken invariants."""


class EdgeListParseError(ValidationError):
    """Malformed edge-list line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConvergenceError(DircomError, RuntimeError):
    """Power iteration did not reach the requested tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class VerificationError(DircomError, AssertionError):
    """A self-check of the detection output failed."""
