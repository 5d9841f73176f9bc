from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from unitscheck.frontend.syntax import Span


class UnitsError(ValueError):
    """Base class of every error raised by unitscheck.

    Parameters
    ----------
    message : str
        Human readable description.
    span : Span, optional
        Source location the error refers to, by default `None`.
    """

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        if self.span is None:
            return self.message
        return f'{self.span.location()}: {self.message}'


class LexError(UnitsError):
    """Illegal character in the source text."""


class ParseError(UnitsError):
    """Token stream does not follow the grammar."""

    def __init__(self,
                 message: str,
                 span: Optional[Span] = None,
                 expected: Optional[str] = None,
                 found: Optional[str] = None):
        super().__init__(message, span)
        self.expected = expected
        self.found = found


class UnresolvedName(ParseError):
    """Identifier without a declaration or parameter in scope."""

    def __init__(self, name: str, span: Span):
        super().__init__(f'unresolved name {name!r}', span)
        self.name = name


class DuplicateName(ParseError):
    """Name declared twice in one scope."""

    def __init__(self, name: str, span: Span):
        super().__init__(f'duplicate declaration of {name!r}', span)
        self.name = name


class MissingResultAssignment(ParseError):
    """Function body never assigns the function result."""


class ConstraintError(UnitsError):
    """Program cannot be turned into unit constraints."""


class ArityMismatch(ConstraintError):
    pass


class UnknownFunction(ConstraintError):
    pass


class PolymorphicAnnotationAtMainScope(ConstraintError):
    pass


class RecursionUnsupported(ConstraintError):
    pass


class PowExponentError(ConstraintError):
    """`**` exponent is not an integer literal."""


class DivisionByZero(UnitsError, ZeroDivisionError):
    pass


class CalledOnInconsistent(UnitsError):
    pass


class RefusesOnInconsistent(UnitsError):
    pass
