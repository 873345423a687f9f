"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised for parameters outside the model's domain (bad N, f, rates...)."""


class SolverError(ArithmeticError):
    """Raised when a stationary distribution cannot be extracted reliably."""
