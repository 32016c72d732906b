"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data cannot support the requested analysis."""


class NumericalError(ArithmeticError):
    """A computation hit a numerical singularity or degenerate input."""
