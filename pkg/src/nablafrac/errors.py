"""Exception types raised by :mod:`nablafrac`."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class RisingOverflowError(OverflowError):
    """A rising factorial does not fit in a double.

    The natural logarithm of its magnitude is kept in :attr:`log_value`.
    """

    def __init__(self, message: str, log_value: float) -> None:
        super().__init__(message)
        self.log_value = log_value


class ModelError(ValueError):
    """Problem data violates a standing hypothesis (p > 0, F >= 0, q >= 0)."""


class LipschitzError(ModelError):
    """Sampled difference quotients of F exceed the declared constant K."""


class TailError(ArithmeticError):
    """A truncated series tail could not be certified below the tolerance."""


class NoContractionError(ArithmeticError):
    """The summation map is not certified to be a contraction."""

    def __init__(self, message: str, report=None) -> None:
        super().__init__(message)
        self.report = report


class MaxIterError(ArithmeticError):
    """Picard iteration hit ``max_iter`` before reaching ``fp_tol``."""

    def __init__(self, message: str, report=None) -> None:
        super().__init__(message)
        self.report = report


class ParseError(ValueError):
    """Malformed run-spec file."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ValueError):
    """A run-spec key is missing or violates its constraint."""

    def __init__(self, key: str, constraint: str) -> None:
        super().__init__(f"{key}: {constraint}")
        self.key = key
        self.constraint = constraint
