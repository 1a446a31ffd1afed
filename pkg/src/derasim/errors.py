"""Exception types shared across the package."""


class FeasibilityError(ValueError):
    """A consumption box or aggregate flow constraint admits no feasible point."""


class CurveRangeError(ValueError):
    """A quantity lies outside the range of a supply curve."""


class AssumptionError(ValueError):
    """An analytic result was requested outside its hypotheses."""


class ConvergenceError(RuntimeError):
    """An iterative solve ran out of iterations; carries the final residuals."""

    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
