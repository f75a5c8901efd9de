import random

import pytest
import sympy

from eds.cartan import (
    QUOTIENT, cartan_summary, ch_generator, closed_form_i, coframe_and_covering,
    compare_solutions, covering_check, db_report, db_system, form_relations, integral_curve, leaf_chart,
    locus_expr, rederive_i, solve_i, solve_ii, verify_solution,
)
from eds.errors import NonPolynomialError
from eds.exterior import pullback
from eds.symcore import Expr, diff, parse

X, T = Expr.var("x"), Expr.var("t")
FAMILY = ["0", "t^2", "t^3+2*t^2", "t^4"]


def test_characteristic_generator():
    s = cartan_summary()
    assert s["cauchy_rank"] == 1 and s["cauchy_generator_matches"] and s["delta"] == "0"


def test_leaf_functions_are_first_integrals():
    Ch = ch_generator()
    assert all(Ch(e).is_zero for e in QUOTIENT.values())
    assert all(leaf_chart().checks["annihilated"].values())


def test_lift_inverts_quotient():
    lc = leaf_chart()
    assert lc.checks["lift_after_quotient"] and lc.checks["quotient_after_lift"]


def test_db_system():
    rep = db_report()
    assert rep["weak_flag"] == [2, 3, 5] and rep["cauchy_rank"] == 0


def test_form_relations():
    rel = form_relations()
    assert rel["w0"] and rel["w1"] and rel["w2"]
    # with coefficient -x instead of -t the middle relation does not hold
    assert rel["w1_minus_x_residue"] != "0"


def test_coframe_and_covering():
    rep = coframe_and_covering()
    assert all(rep["coframe_matches"].values())
    assert all(rep["chart_forms_match"].values())
    assert rep["f"] == {"transversal": "-a^2", "nontransversal": "1"}
    assert len(rep["covering"]) == 10 and all(rep["covering"])
    assert covering_check({"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "t": 0})


@pytest.mark.parametrize("y0", FAMILY)
def test_solve_i_family(y0):
    S = solve_i(y0)
    rep = verify_solution(S)
    assert rep["pullbacks_zero"] and all(rep["pullbacks"].values())
    assert S.rederivation["mismatched_slots"] == []
    expected = X - diff(parse(y0), "t")
    assert (locus_expr(S) / expected).is_constant
    assert rep["through_origin"]
    assert rep["immersion_at_samples"] and rep["locus_principal"]


def test_origin_missed_when_slope_nonzero():
    S = solve_i("t")
    rep = verify_solution(S)
    assert rep["pullbacks_zero"] and not rep["through_origin"]
    assert S.warnings


def test_closed_form_matches_sympy_integration():
    # independent oracle: integrate the graph equations with sympy
    x, t = sympy.symbols("x t")
    y0 = t ** 3 + 2 * t ** 2
    y = -t * x + y0
    b = sympy.diff(y, t)
    q = sympy.integrate(-t ** 2 / 2, x) + sympy.integrate(sympy.expand(b * t - sympy.diff(-t ** 2 * x / 2, t)), t)
    p = sympy.integrate(-t ** 3 / 6, x) + sympy.integrate(sympy.expand(b * t ** 2 / 2 - sympy.diff(-t ** 3 * x / 6, t)), t)
    zx = sympy.integrate(sympy.expand(p - q * t), x)
    z = zx + sympy.integrate(sympy.expand(b * q - sympy.diff(zx, t)), t)
    ours = closed_form_i(parse("t^3+2*t^2"))
    for name, ref in (("q", q), ("p", p), ("z", z), ("b", b)):
        assert sympy.expand(sympy.sympify(str(ours[name]).replace("^", "**")) - ref) == 0


def test_integral_curve_annihilates_db():
    c = integral_curve(parse("tau^3 - tau^2"))
    assert all(pullback(c, a).is_zero for a in db_system().generators)


def test_solve_ii_surface():
    S = solve_ii("tau^2")
    rep = verify_solution(S)
    assert rep["pullbacks_zero"] and rep["through_origin"]


@pytest.mark.parametrize("y0", ["t^2", "t^3", "t^4 - t^2", "t^6 + t^5"])
def test_approaches_agree(y0):
    assert compare_solutions(y0)


def test_approaches_agree_on_random_draws():
    rng = random.Random(5)
    t = Expr.var("t")
    for _ in range(10):
        y0 = Expr.const(0)
        for k in range(2, 7):
            y0 = y0 + t ** k * rng.randint(-4, 4)
        assert compare_solutions(y0)


def test_rejects_non_polynomial_data():
    with pytest.raises(NonPolynomialError):
        solve_i("1/(t+1)")
    with pytest.raises(NonPolynomialError):
        solve_i("x*t")


def test_solution_json():
    S = solve_i("t^2")
    js = S.to_json({"pullbacks_zero": True})
    assert js["parameters"] == ["x", "t"]
    assert set(js["components"]) == {"x", "y", "z", "p", "q", "t", "b"}
    assert js["free_function"] == "t^2"


def test_rederivation_agrees_with_closed_form():
    y0 = parse("t^5 - 3*t^2")
    assert rederive_i(y0) == closed_form_i(y0)
