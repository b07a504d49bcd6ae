"""Exception types shared across the package."""


class QPriorError(Exception):
    """Base class for all package errors."""


class ValidationError(QPriorError, ValueError):
    """Input failed a structural check (shape, symmetry, parse)."""


class DomainError(QPriorError, ValueError):
    """Parameters lie outside the domain where a quantity is defined."""


class SingularStateError(DomainError):
    """A density matrix has (numerically) zero eigenvalues where the
    computation divides by them, or a coordinate system is singular."""


class IntegrationError(QPriorError, ArithmeticError):
    """Quadrature failed: non-finite integrand or no convergence."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SupportMismatchError(QPriorError, ArithmeticError):
    """Relative entropy diverges because q vanishes where p does not."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
