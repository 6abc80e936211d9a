"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, numerical failures exit 3.
"""


class ShapeError(ValueError):
    """Operands have incompatible or unexpected dimensions."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to converge; carries the final residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class DivergenceError(NumericError):
    """A simulation or training run blew up; ``step`` names where."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DataError(ValueError):
    """Malformed input data (CSV parse failures, invalid signals, ...)."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""
