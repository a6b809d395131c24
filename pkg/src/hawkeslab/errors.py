"""Exception types shared across the package."""


class HawkesLabError(Exception):
    """Base class for all package-specific errors."""


class ModelValidationError(HawkesLabError, ValueError):
    """Model shapes/parameters are inconsistent or the stability assumptions fail.

    ``issues`` holds one human-readable string per problem.
    """

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [issues]
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class SingularMatrixError(HawkesLabError, ValueError):
    """Matrix is singular or too ill-conditioned to invert reliably."""

    def __init__(self, message, cond=None):
        self.cond = cond
        if cond is not None:
            message = f"{message} (condition estimate {cond:.3e})"
        super().__init__(message)


class IndefiniteMatrixError(HawkesLabError, ValueError):
    """Matrix passed to a factorization that requires positive semidefiniteness."""


class RunawayProcessError(HawkesLabError, RuntimeError):
    """A simulated path exceeded the per-path event cap (near-critical model?)."""
