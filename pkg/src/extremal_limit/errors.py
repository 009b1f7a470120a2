"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ModelInvalidError(ValueError):
    """A Levy model fails one of its construction checks."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.

    ``diagnostics`` carries the partial estimate, the error bound reached and
    the number of panels used, so callers can report where it broke down.
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)
