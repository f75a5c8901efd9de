"""Exception hierarchy shared by every module."""

from __future__ import annotations


class EDSError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InputError(EDSError):
    """Malformed user input (CLI exit code 2)."""


class ParseError(InputError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class PoleError(EDSError, ZeroDivisionError):
    """Division by the zero expression, or a denominator vanishing at a point."""


class UnboundVariableError(EDSError, KeyError):
    def __str__(self) -> str:
        return f"unbound variable {self.args[0]!r}"


class NonPolynomialError(EDSError, ValueError):
    pass


class ChartMismatchError(EDSError, ValueError):
    pass


class DegeneracyError(EDSError):
    """A rank or pivot degenerates; ``locus`` holds the offending polynomials."""

    def __init__(self, message: str, locus=()):
        self.locus = tuple(locus)
        if self.locus:
            message += " (locus: " + ", ".join(f"{e} = 0" for e in self.locus) + ")"
        super().__init__(message)


class DependentGeneratorsError(DegeneracyError):
    pass


class WrongTypeError(EDSError):
    """The system does not have the type an operation requires."""


class VerificationError(EDSError):
    """An internal cross-check failed; carries the nonzero residue."""

    def __init__(self, message: str, residue=None):
        self.residue = residue
        super().__init__(message if residue is None else f"{message}: residue {residue}")
