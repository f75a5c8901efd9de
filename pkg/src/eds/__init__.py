"""Exact symbolic toolkit for exterior differential systems.

Rational-function expressions, differential forms on coordinate charts,
Pfaffian systems and their derived flags, classification and prolongation of
second-order overdetermined systems in two independent variables, symbol
algebras, and the singular solutions of Cartan's example.
"""

from .errors import (
    ChartMismatchError,
    DegeneracyError,
    DependentGeneratorsError,
    EDSError,
    InputError,
    NonPolynomialError,
    ParseError,
    PoleError,
    UnboundVariableError,
    VerificationError,
    WrongTypeError,
)
from .exterior import Chart, DForm, SmoothMap, VectorField, d, interior, lie_bracket, pullback, wedge
from .symcore import Expr, parse

__version__ = "0.1.0"

__all__ = [
    "Chart", "DForm", "Expr", "SmoothMap", "VectorField",
    "d", "interior", "lie_bracket", "parse", "pullback", "wedge",
    "ChartMismatchError", "DegeneracyError", "DependentGeneratorsError", "EDSError", "InputError",
    "NonPolynomialError", "ParseError", "PoleError", "UnboundVariableError", "VerificationError",
    "WrongTypeError",
]
