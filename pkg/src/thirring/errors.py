"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid physical or run configuration (odd lattice, incompatible method, ...)."""


class DomainError(ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class ResourceError(MemoryError):
    """The requested object would exceed the documented size limit."""


class ValidationError(ValueError):
    """An input failed a numerical validation check (unitarity, hermiticity, ...)."""


class NumericalHealthError(ArithmeticError):
    """A computed quantity is outside its physically allowed range beyond round-off."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
