from fractions import Fraction

import pytest
from hypothesis import given

from eds.errors import NonPolynomialError, ParseError, PoleError, UnboundVariableError
from eds.symcore import (
    ONE, ZERO, Expr, antiderive_poly, arith, as_expr, diff, evaluate, parse, poly_gcd,
    poly_quotient, sign_at, substitute,
)

from conftest import poly_in, points

x, y, t, a = (Expr.var(n) for n in "xyta")


def test_antiderivative_of_square():
    assert str(antiderive_poly(parse("t^2"), "t")) == "1/3*t^3"


def test_binomial_identity_cancels():
    assert parse("(x+y)^2 - x^2 - 2*x*y - y^2").is_zero


def test_reciprocal_prints_as_fraction():
    assert str(parse("1/a")) == "(1)/(a)"


def test_substitution_into_rational():
    e = parse("(x^2 - y^2)/(x - y)")
    assert e == x + y
    assert substitute(e, {"x": 0}) == y


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse("2x")
    assert err.value.position == 1


def test_division_by_zero_polynomial_is_parse_error():
    with pytest.raises(ParseError):
        parse("1/(x-x)")


@pytest.mark.parametrize("text", ["", "x +", "(x", "x)", "x^y", "x^-1", "3 $ 4", "x^(2)"])
def test_malformed_inputs_rejected(text):
    with pytest.raises(ParseError):
        parse(text)


def test_unary_minus_and_rationals():
    assert parse("-3/4*x + 1/2") == Expr.const(Fraction(-3, 4)) * x + Fraction(1, 2)
    assert parse("--x") == x


def test_canonical_denominator_is_monic():
    e = parse("x/(2*y)")
    assert e.denominator() == y
    assert str(e) == "(1/2*x)/(y)"


def test_evaluate_errors():
    with pytest.raises(UnboundVariableError):
        evaluate(x + y, {"x": 1})
    with pytest.raises(PoleError):
        evaluate(ONE / x, {"x": 0})
    with pytest.raises(PoleError):
        substitute(ONE / (x - 1), {"x": 1})


def test_antiderive_rejects_rational():
    with pytest.raises(NonPolynomialError):
        antiderive_poly(ONE / t, "t")


def test_gcd_and_quotient():
    g = poly_gcd([parse("x^2 - 1"), parse("x^2 + 2*x + 1")])
    assert g == x + 1
    assert poly_quotient(parse("x^2-1"), x + 1) == x - 1
    assert poly_quotient(x, y) is None


def test_sign_and_misc():
    assert sign_at(parse("x - 2"), {"x": 1}) == -1
    assert arith("x", "*", 3) == 3 * x
    assert as_expr(Fraction(1, 3)) == parse("1/3")
    assert ZERO.is_zero and not ONE.is_zero
    assert parse("x^3*y").degree("x") == 3


@given(poly_in("xyz"), poly_in("xyz"))
def test_print_round_trip(p, q):
    e = p / q if not q.is_zero else p
    assert parse(str(e)) == e


@given(poly_in("xy"), poly_in("xy"), poly_in("xy"))
def test_ring_laws(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert p * q == q * p
    assert (p - p).is_zero


@given(poly_in("xy"), poly_in("xy"))
def test_quotient_rule(p, q):
    if q.is_zero:
        return
    assert diff(p / q, "x") == (diff(p, "x") * q - p * diff(q, "x")) / (q * q)


@given(poly_in("xy"), points("xy"))
def test_evaluate_matches_substitute(p, pt):
    assert substitute(p, pt).constant_value() == evaluate(p, pt)


@given(poly_in("t"))
def test_antiderivative_inverts_diff(p):
    assert diff(antiderive_poly(p, "t"), "t") == p
    assert evaluate(antiderive_poly(p, "t"), {"t": 0}) == 0
