"""Shared hypothesis strategies: small polynomials, forms and fields."""

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from eds.exterior import Chart, DForm, SmoothMap, VectorField
from eds.symcore import Expr

settings.register_profile("eds", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("eds")

XYZ = Chart(("x", "y", "z"))
UV = Chart(("u", "v"))

small = st.integers(min_value=-3, max_value=3)


def poly_in(names, max_terms=3, max_deg=2):
    mono = st.tuples(*[st.integers(0, max_deg) for _ in names])

    def build(terms):
        e = Expr.const(0)
        for c, exps in terms:
            m = Expr.const(c)
            for n, k in zip(names, exps):
                m = m * Expr.var(n) ** k
            e = e + m
        return e

    return st.lists(st.tuples(small, mono), min_size=0, max_size=max_terms).map(build)


def forms(chart, degree, max_terms=2):
    from itertools import combinations
    idx = list(combinations(range(chart.dim), degree))

    @st.composite
    def build(draw):
        out = {}
        for k in draw(st.lists(st.sampled_from(idx), max_size=max_terms, unique=True)):
            out[k] = draw(poly_in(chart.coords))
        return DForm(chart, degree, out)

    return build()


def fields(chart):
    return st.lists(poly_in(chart.coords), min_size=chart.dim, max_size=chart.dim).map(
        lambda cs: VectorField(chart, cs))


def maps(source, target):
    return st.lists(poly_in(source.coords, max_deg=2), min_size=target.dim, max_size=target.dim).map(
        lambda cs: SmoothMap(source, target, tuple(cs)))


def points(names):
    return st.fixed_dictionaries({n: st.fractions(min_value=-3, max_value=3, max_denominator=4) for n in names})


@pytest.fixture
def F():
    return Fraction
