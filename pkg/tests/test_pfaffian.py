import pytest
from hypothesis import given
from hypothesis import strategies as st

from eds.cartan import B_CHART, cartan_chart, db_system
from eds.errors import DegeneracyError
from eds.exterior import Chart, VectorField, d, interior, reduce_mod
from eds.pfaffian import (
    PfaffSystem, annihilator, annihilator_agrees, bracket_compatible, cauchy_char, derived,
    dual_frame, flag_stage_system, growth_at, in_span, independent_fields, strong_flag, weak_flag,
)
from eds.symcore import Expr

from conftest import poly_in

M5 = Chart(("x", "y", "u", "z1", "z2"))


@st.composite
def systems(draw):
    """One or two generators ``dz_i − f_i dx − g_i dy`` with polynomial coefficients."""
    k = draw(st.integers(1, 2))
    gens = []
    for i in range(k):
        f = draw(poly_in(M5.coords, max_terms=2))
        g = draw(poly_in(M5.coords, max_terms=2))
        z = f"z{i + 1}"
        gens.append(M5.d(z) - M5.d("x") * f - M5.d("y") * g)
    return PfaffSystem(M5, tuple(gens))


def test_cartan_weak_flag_and_locus():
    S = cartan_chart().pfaff
    flag = weak_flag(S)
    assert flag.ranks == (3, 4, 6)
    assert [str(e) for e in flag.loci] == ["t^2"]


def test_cartan_derived_system():
    R = cartan_chart()
    D1 = derived(R.pfaff)
    assert len(D1.generators) == 2 and D1.rank == 4
    T = Expr.var("t")
    target = PfaffSystem(R.chart, (R.w0, R.w1 - R.w2 * T))
    assert all(target.reduce(g).is_zero for g in D1.generators)


def test_cartan_cauchy_field():
    R = cartan_chart()
    C = cauchy_char(R.pfaff)
    assert C.rank == 1
    t, p, q = (Expr.var(n) for n in "tpq")
    expected = VectorField.from_dict(R.chart, {"x": 1, "y": -t, "z": p - q * t, "p": -t ** 3 / 6, "q": -t ** 2 / 2})
    assert C.fields[0] == expected


def test_db_is_235_with_trivial_characteristics():
    S = db_system()
    assert weak_flag(S).ranks == (2, 3, 5)
    assert strong_flag(S).ranks == (2, 3, 5)
    assert cauchy_char(S).rank == 0
    assert growth_at(S, {n: 0 for n in B_CHART.coords}) == (2, 3, 5)
    assert len(dual_frame(S)) == 2
    assert all(a(X).is_zero for a in S.generators for X in dual_frame(S))


def test_growth_degenerates_on_locus():
    S = cartan_chart().pfaff
    with pytest.raises(DegeneracyError) as err:
        growth_at(S, {"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "t": 0})
    assert [str(e) for e in err.value.locus] == ["t^2"]
    assert growth_at(S, {"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "t": 1}) == (3, 4, 6)


def test_annihilator_and_span():
    C = Chart(("x", "y", "z"))
    X = VectorField.from_dict(C, {"x": 1, "z": Expr.var("y")})
    forms, _ = annihilator(C, [X])
    assert len(forms) == 2 and all(a(X).is_zero for a in forms)
    assert in_span(X * Expr.var("x"), [X])
    chosen, _ = independent_fields([X, X * 2, C.partial("y")])
    assert len(chosen) == 2


def test_stage_system_annihilates_frame():
    flag = weak_flag(cartan_chart().pfaff)
    S1 = flag_stage_system(flag, 1)
    assert S1.rank == 4
    assert all(a(X).is_zero for a in S1.generators for X in flag.frames[1])


def test_flag_json_shape():
    js = weak_flag(cartan_chart().pfaff).to_json()
    assert js == {"mode": "weak", "ranks": [3, 4, 6], "degeneracy_loci": ["t^2"]}


@given(systems())
def test_weak_flag_monotone(S):
    flag = weak_flag(S)
    assert flag.ranks[0] == S.rank
    assert all(a < b for a, b in zip(flag.ranks, flag.ranks[1:]))
    for k in range(1, flag.mu):
        assert all(in_span(X, flag.frames[k]) for X in flag.frames[k - 1])


@given(systems())
def test_strong_flag_monotone(S):
    flag = strong_flag(S)
    assert all(a < b for a, b in zip(flag.ranks, flag.ranks[1:]))
    for prev, nxt in zip(flag.stages, flag.stages[1:]):
        assert all(prev.reduce(g).is_zero for g in nxt.generators)


@given(systems())
def test_bracket_compatibility(S):
    assert bracket_compatible(weak_flag(S))


@given(systems())
def test_derived_annihilator_agrees_with_brackets(S):
    assert annihilator_agrees(S)


@given(systems())
def test_cauchy_fields_are_characteristic(S):
    C = cauchy_char(S)
    for V in C.fields:
        assert S.contains_field(V)
        assert all(reduce_mod(interior(V, d(g)), S.generators).is_zero for g in S.generators)
