"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid (n, k) or method parameters."""


class GenerationError(RuntimeError):
    """Random graph generation exhausted its retry budget."""


class ValidationError(ValueError):
    """A graph violates the k-regular / simple / connected invariants."""


class FormatError(ValueError):
    """Malformed edge-list file."""


class DenseCapError(ValueError):
    """Graph too large for the dense eigensolver."""


class NumericalError(ArithmeticError):
    """Non-finite values met during quadrature or evaluation."""


class DomainError(ValueError):
    """Argument outside the domain of a closed-form expression."""


class UnsupportedMethodError(ValueError):
    """Method not supported by the requested operation."""
