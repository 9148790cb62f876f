"""Exception types shared across the package."""

from __future__ import annotations


class SylsolveError(Exception):
    """Base class for package errors."""


class ParseError(SylsolveError):
    """Malformed system file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonConvergenceError(SylsolveError):
    """Periodic QZ iteration hit its sweep cap; partial form attached."""

    def __init__(self, message, partial_form=None):
        super().__init__(message)
        self.partial_form = partial_form


class IrregularPencilError(SylsolveError):
    """Pencil (or formal product) is identically singular."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularCoefficientError(SylsolveError):
    """An eliminated equation requires an invertible coefficient that is
    numerically singular (makes the whole system singular)."""

    def __init__(self, message, equation_index=None, which=None):
        super().__init__(message)
        self.equation_index = equation_index
        self.which = which


class SingularSmallSystemError(SylsolveError):
    """A diagonal block of the back-substitution is numerically singular,
    which certifies that the periodic system itself is singular."""

    def __init__(self, message, i=None, j=None, certificate=None):
        super().__init__(message)
        self.i = i
        self.j = j
        self.certificate = certificate
