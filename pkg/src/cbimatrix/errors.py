"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class DivergenceError(ArithmeticError):
    """A hypergeometric series was detected to diverge."""
