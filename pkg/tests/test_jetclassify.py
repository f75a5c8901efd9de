import random
from fractions import Fraction

import pytest

from eds.errors import InputError
from eds.exterior import reduce_mod
from eds.jetclassify import (
    SolvedSystem, build_chart, classification_report, classify_type, fiber_at,
    first_prolongation_is_sigma, regularity_check, regularity_check_raw, symbol_pencil,
    transversal_fiber,
)
from eds.pfaffian import cauchy_char
from eds.symcore import parse

CARTAN = SolvedSystem.create({"r": "t^3/3", "s": "t^2/2"}, "t")
TYPE2 = SolvedSystem.create({"r": "0", "t": "0"}, "s")
TYPE3 = SolvedSystem.create({"r": "t", "s": "0"}, "t")
TYPE4 = SolvedSystem.create({"r": "q", "s": "0"}, "t")
ROTATED2 = SolvedSystem.create({"r": "-t", "s": "0"}, "t")


def unit(m="t", value=1):
    return {"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, m: value}


def random_points(m, n, seed):
    rng = random.Random(seed)
    return [{c: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for c in ("x", "y", "z", "p", "q", m)}
            for _ in range(n)]


def test_restricted_forms():
    R = build_chart(CARTAN)
    assert str(R.w1) == "(-1/3*t^3)*dx + (-1/2*t^2)*dy + dp"
    R0 = build_chart(SolvedSystem.create({"r": "0", "s": "0"}, "t"))
    assert str(R0.w1) == "dp" and str(R0.w2) == "(-t)*dy + dq"
    R2 = build_chart(TYPE2)
    assert str(R2.w1) == "(-s)*dy + dp" and str(R2.w2) == "(-s)*dx + dq"


def test_solved_system_validation():
    with pytest.raises(InputError):
        SolvedSystem.create({"r": "0"}, "t")
    with pytest.raises(InputError):
        SolvedSystem.create({"r": "s", "s": "0"}, "t")
    with pytest.raises(InputError):
        SolvedSystem.from_json({"solved": {"r": "w", "s": "0"}})
    assert SolvedSystem.from_json(CARTAN.to_json()) == CARTAN


def test_regularity_reports_minor():
    assert regularity_check(CARTAN)["minor"] == "1"
    F = parse("r - t")
    assert regularity_check_raw(F, F, [unit()])["point_ranks"] == [1]


def test_classification_table():
    assert classify_type(build_chart(CARTAN), unit()) == "I"
    assert classify_type(build_chart(TYPE2), unit("s")) == "II"
    assert classify_type(build_chart(TYPE3), unit()) == "III"
    assert classify_type(build_chart(TYPE4), unit()) == "IV"
    assert classify_type(build_chart(ROTATED2), unit()) == "II"


def test_torsion_type_degenerates_where_it_changes():
    lab = classify_type(build_chart(TYPE4), unit(value=0))
    assert lab == "Degenerate"


def test_normal_forms_cross_check():
    # z_xx = z_yy = 0: dϖ₁ ≡ dy∧ds, z_xx = z_yy with z_xy = 0: dϖ₁ ≡ dx∧dt
    R = build_chart(TYPE2)
    ch = R.chart
    assert reduce_mod(R.w1.d() - (ch.d("y") ^ ch.d("s")), R.forms).is_zero
    R = build_chart(TYPE3)
    ch = R.chart
    assert reduce_mod(R.w1.d() - (ch.d("x") ^ ch.d("t")), R.forms).is_zero


def test_pencil_discriminant_signs():
    assert symbol_pencil(CARTAN).delta.is_zero
    assert symbol_pencil(TYPE2).delta.constant_value() > 0
    assert symbol_pencil(TYPE3).delta.constant_value() < 0
    assert symbol_pencil(ROTATED2).delta.constant_value() > 0


def test_cartan_fiber_is_pencil_everywhere():
    R = build_chart(CARTAN)
    for pt in random_points("t", 20, 1):
        fb = fiber_at(R, pt)
        assert fb.kernel_dim == 2 and fb.has_transversal and fb.has_nontransversal
        assert fb.transversal_fiber == "line"


def test_finite_and_torsion_fibers():
    for sys_, m in ((TYPE2, "s"), (TYPE3, "t"), (ROTATED2, "t")):
        fb = fiber_at(build_chart(sys_), unit(m))
        assert fb.kernel_dim == 1 and fb.transversal == [True]
        assert fb.transversal_fiber == "point"
    fb = fiber_at(build_chart(TYPE4), unit())
    assert fb.kernel_dim == 1 and fb.transversal == [False]
    assert fb.transversal_fiber == "empty"
    assert transversal_fiber(build_chart(TYPE4), unit()) == "empty"


def test_first_prolongation_versus_sigma():
    assert first_prolongation_is_sigma(build_chart(TYPE2), unit("s"))
    assert first_prolongation_is_sigma(build_chart(TYPE3), unit())
    assert not first_prolongation_is_sigma(build_chart(CARTAN), unit())
    assert not first_prolongation_is_sigma(build_chart(TYPE4), unit())


def test_swap_invariance():
    for sys_, m in ((CARTAN, "t"), (TYPE2, "s"), (TYPE3, "t")):
        a = classify_type(build_chart(sys_), unit(m))
        sw = sys_.swap_xy()
        b = classify_type(build_chart(sw), unit(sw.parameter))
        assert a == b
    sw = TYPE4.swap_xy()
    assert classify_type(build_chart(sw), unit(sw.parameter, 1)) in ("IV", "Degenerate")


def test_cauchy_criterion_agrees():
    for sys_, m in ((CARTAN, "t"), (TYPE2, "s"), (TYPE3, "t"), (TYPE4, "t")):
        R = build_chart(sys_)
        rank = cauchy_char(R.pfaff).rank
        assert (classify_type(R, unit(m)) == "I") == (rank == 1)


def test_gauge_robustness():
    for sys_, m in ((CARTAN, "t"), (TYPE3, "t"), (TYPE4, "t")):
        R = build_chart(sys_)
        mixed = R.with_forms(R.w1 * 2 + R.w2, R.w1 - R.w2 * 3)
        a, b = fiber_at(R, unit(m)), fiber_at(mixed, unit(m))
        assert a.kernel_basis == b.kernel_basis
        assert classify_type(R, unit(m)) == classify_type(mixed, unit(m))


def test_report_shape():
    rep = classification_report(build_chart(CARTAN), unit())
    assert rep["type"] == "I" and rep["cauchy_rank"] == 1 and rep["cauchy_consistent"]
    assert rep["delta_sign"] == 0
    assert {"type", "kernel_dim", "transversal", "delta_sign", "cauchy_rank", "certificates"} <= set(rep)
    assert set(rep["certificates"]) == {"minors", "loci"}
