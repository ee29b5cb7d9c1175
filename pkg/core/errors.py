"""
Exception taxonomy shared by the library and the CLI.

ValidationError maps to exit code 2, NumericalError to exit code 3.
"""

from typing import Optional


class NCDomainError(Exception):
    """Base class for all ncdomain failures"""


class ValidationError(NCDomainError, ValueError):
    """Malformed or out-of-range input"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class SymbolValidationError(ValidationError):
    """Coefficient table violates positivity or regularity"""


class NotInDomainError(ValidationError):
    """Tuple or scalar point lies outside the required domain"""


class PreconditionError(ValidationError):
    """Operation precondition violated beyond tolerance"""


class SubharmonicityError(PreconditionError):
    """Y - Phi(Y) fails to be positive semidefinite"""


class NumericalError(NCDomainError, ArithmeticError):
    """Numerical failure during a computation"""


class DimensionCapError(NumericalError):
    """Fock basis would exceed the configured dimension cap"""


class SingularKernelError(NumericalError):
    """A resolvent or kernel denominator is singular to working precision"""


class DivergenceError(NumericalError):
    """Partial sums grew past the divergence limit"""
