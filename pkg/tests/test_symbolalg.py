import pytest
from hypothesis import given
from hypothesis import strategies as st

from eds.errors import WrongTypeError
from eds.exterior import lie_bracket
from eds.jetclassify import SolvedSystem, build_chart
from eds.pfaffian import weak_flag
from eds.prolong import NONTRANSVERSAL, TRANSVERSAL, good_points, prolong, stratify
from eds.symbolalg import (
    DEGREES, F0, F1, abelian, chart_filtration, chart_symbol, filtration_compatible,
    generating_check, k_invariant, match_model, structure_functions, symbol_frame, table_match,
)

P = prolong(build_chart(SolvedSystem.create({"r": "t^3/3", "s": "t^2/2"}, "t")))
T, N = P.chart(TRANSVERSAL), P.chart(NONTRANSVERSAL)
SIGMA0 = good_points(T, 10, seed=11)
SIGMA1 = good_points(N, 10, seed=12, fixed={"b": 0})


def test_models_are_graded_lie_algebras():
    for g in (F0, F1):
        assert g.dims == (3, 1, 2, 1)
        assert g.jacobi_ok() and g.grading_ok()
    assert k_invariant(F0) == 0 and k_invariant(F1) == 1


def test_generating_condition_fails_for_both_models():
    # the degree -3 generator X₁ is never a bracket with degree -1
    assert not generating_check(F0)
    assert not generating_check(F1)


def test_abelian_is_neither():
    m = match_model(abelian(DEGREES))
    assert m.model == "neither" and m.k == 2


def test_wrong_dims_rejected():
    with pytest.raises(WrongTypeError):
        match_model(abelian([-1, -1, -2]))


def test_sample_points_lie_on_their_strata():
    assert all(stratify(T, pt) == "Σ0" for pt in SIGMA0)
    assert all(stratify(N, pt) == "Σ1" for pt in SIGMA1)


@pytest.mark.parametrize("pt", SIGMA0)
def test_sigma0_symbol_is_f0(pt):
    g = chart_symbol(T, pt)
    assert g.dims == (3, 1, 2, 1)
    m = match_model(g)
    assert (m.model, m.k, m.table_ok) == ("f0", 0, True)


@pytest.mark.parametrize("pt", SIGMA1)
def test_sigma1_symbol_is_f1(pt):
    g = chart_symbol(N, pt)
    assert g.dims == (3, 1, 2, 1)
    m = match_model(g)
    assert (m.model, m.k, m.table_ok) == ("f1", 1, True)


def test_filtration_is_bracket_compatible():
    for c in (T, N):
        frame = symbol_frame(c)
        assert filtration_compatible(frame)
        chart_filtration(c).check_adapted(frame)


def test_structure_functions_match_direct_brackets():
    frame = symbol_frame(T)
    sf = structure_functions(frame)
    for (i, j), res in sf.items():
        br = lie_bracket(frame.fields[i], frame.fields[j])
        for k, th in enumerate(frame.coframe):
            assert th(br) == res.get(k, th(br) * 0)


def test_weak_flag_of_canonical_system_differs_from_filtration():
    assert weak_flag(T.canonical).ranks == (3, 4, 5, 6, 7)
    assert chart_filtration(T).ranks == (3, 4, 6, 7)


@given(st.lists(st.sampled_from([1, -1]), min_size=7, max_size=7))
def test_table_match_recovers_sign_flips(signs):
    assert table_match(F0.signed(signs), F0) is not None
    assert table_match(F1.signed(signs), F0) is None


def test_json_shape():
    js = chart_symbol(T, SIGMA0[0]).to_json()
    assert js["dims"] == [3, 1, 2, 1]
    assert all(set(b) == {"deg_pair", "basis_pair", "result_coeffs"} for b in js["brackets"])
