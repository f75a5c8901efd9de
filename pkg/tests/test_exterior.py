import pytest
from hypothesis import given

from eds.errors import ChartMismatchError, DependentGeneratorsError
from eds.exterior import (
    Chart, DForm, PfaffIdeal, SmoothMap, VectorField, congruent, d, dual_basis, interior,
    lie_bracket, pairing, pullback, reduce_mod, wedge,
)
from eds.symcore import Expr, parse

from conftest import UV, XYZ, fields, forms, maps

x, y, z = (Expr.var(n) for n in "xyz")


def test_wedge_antisymmetry_and_square():
    dx, dy = XYZ.d("x"), XYZ.d("y")
    assert dx ^ dy == -(dy ^ dx)
    assert (dx ^ dx).is_zero


def test_wedge_evaluates_as_determinant():
    dx, dy = XYZ.d("x"), XYZ.d("y")
    X = VectorField.from_dict(XYZ, {"x": 1, "y": 2})
    Y = VectorField.from_dict(XYZ, {"x": 3, "y": 5})
    assert (dx ^ dy)(X, Y) == Expr.const(1 * 5 - 2 * 3)


def test_exterior_derivative_of_contact_form():
    J = Chart(("x", "y", "z", "p", "q"))
    w0 = J.d("z") - J.d("x") * J.var("p") - J.d("y") * J.var("q")
    assert d(w0) == (J.d("x") ^ J.d("p")) + (J.d("y") ^ J.d("q"))


def test_interior_sign_and_lie_bracket():
    dx, dy = XYZ.d("x"), XYZ.d("y")
    X = XYZ.partial("y")
    assert interior(X, dx ^ dy) == -dx
    A = VectorField.from_dict(XYZ, {"x": 1})
    B = VectorField.from_dict(XYZ, {"y": x})
    assert lie_bracket(A, B) == XYZ.partial("y")


def test_chart_mismatch():
    with pytest.raises(ChartMismatchError):
        XYZ.d("x") + UV.d("u")


def test_pullback_of_area_form():
    polar = Chart(("r", "s"))
    r, s = polar.var("r"), polar.var("s")
    phi = SmoothMap.from_dict(polar, XYZ, {"x": r * s, "y": r, "z": 0})
    assert pullback(phi, XYZ.d("x") ^ XYZ.d("y")) == -r * (polar.d("r") ^ polar.d("s"))


def test_ideal_reduction_and_dependence():
    J = Chart(("x", "y", "z", "p"))
    w = J.d("z") - J.d("x") * J.var("p")
    assert reduce_mod(w ^ J.d("y"), [w]).is_zero
    assert congruent(J.d("z"), J.d("x") * J.var("p"), [w])
    with pytest.raises(DependentGeneratorsError):
        PfaffIdeal([w, w * 2])


def test_dual_basis_pairs_to_identity():
    cof = [XYZ.d("x"), XYZ.d("y") + XYZ.d("x") * z, XYZ.d("z")]
    dual = dual_basis(cof)
    for i, a in enumerate(cof):
        for j, V in enumerate(dual):
            assert pairing(a, V) == Expr.const(1 if i == j else 0)


def test_json_round_trip():
    a = (XYZ.d("x") ^ XYZ.d("z")) * parse("x/(y+1)")
    assert DForm.from_json(a.to_json()) == a


@given(forms(XYZ, 1))
def test_d_squared_vanishes_on_one_forms(a):
    assert d(d(a)).is_zero


@given(forms(XYZ, 0, max_terms=1))
def test_d_squared_vanishes_on_functions(f):
    assert d(d(f)).is_zero


@given(forms(XYZ, 1), forms(XYZ, 1))
def test_leibniz_rule(a, b):
    assert d(wedge(a, b)) == wedge(d(a), b) - wedge(a, d(b))


@given(maps(UV, XYZ), forms(XYZ, 1))
def test_pullback_commutes_with_d(phi, a):
    assert pullback(phi, d(a)) == d(pullback(phi, a))


@given(fields(XYZ), fields(XYZ), fields(XYZ))
def test_jacobi_identity(A, B, C):
    s = lie_bracket(A, lie_bracket(B, C)) + lie_bracket(B, lie_bracket(C, A)) + lie_bracket(C, lie_bracket(A, B))
    assert s.is_zero


@given(forms(XYZ, 1), fields(XYZ), fields(XYZ))
def test_exterior_derivative_formula(a, A, B):
    assert d(a)(A, B) == A(a(B)) - B(a(A)) - a(lie_bracket(A, B))


@given(forms(XYZ, 1), forms(XYZ, 1), fields(XYZ))
def test_interior_graded_leibniz(a, b, V):
    assert interior(V, wedge(a, b)) == wedge(interior(V, a), b) - wedge(a, interior(V, b))
