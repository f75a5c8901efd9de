"""Pfaffian systems: dual frames, derived flags, Cauchy characteristics.

A :class:`PfaffSystem` is given by its annihilator, a list of independent
1-forms on a chart.  Ranks are computed over the field of rational
functions; every nonconstant pivot met along the way is kept as a locus on
which the generic answer may fail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import linalg
from .errors import DegeneracyError
from .exterior import Chart, DForm, PfaffIdeal, VectorField, d, interior, lie_bracket, reduce_mod
from .symcore import ONE, ZERO, evaluate


@dataclass(frozen=True)
class PfaffSystem:
    chart: Chart
    generators: tuple
    loci: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            if g.chart != self.chart or g.degree != 1:
                raise ValueError("generators must be 1-forms on the system's chart")

    @property
    def rank(self) -> int:
        return self.chart.dim - len(self.generators)

    @property
    def ideal(self) -> PfaffIdeal | None:
        return PfaffIdeal(self.generators) if self.generators else None

    def reduce(self, a: DForm) -> DForm:
        return reduce_mod(a, self.generators)

    def contains_field(self, X: VectorField) -> bool:
        return all(not g(X) for g in self.generators)

    def to_chart(self, chart: Chart) -> "PfaffSystem":
        return PfaffSystem(chart, tuple(g.to_chart(chart) for g in self.generators), self.loci)

    def to_json(self) -> dict:
        return {"coords": list(self.chart.coords), "rank": self.rank,
                "generators": [g.to_json() for g in self.generators]}


def full_tangent(chart: Chart) -> PfaffSystem:
    return PfaffSystem(chart, ())


# --------------------------------------------------------------------------
# frames and annihilators
# --------------------------------------------------------------------------

def dual_frame(S: PfaffSystem) -> list:
    """Rank-many fields spanning ``ker S``, one per complement coordinate.

    The field attached to complement coordinate ``c`` is ``∂c`` plus a
    combination of the pivot directions.
    """
    chart = S.chart
    if not S.generators:
        return [chart.partial(n) for n in chart.coords]
    I = PfaffIdeal(S.generators)
    frame = []
    for c in I.complement:
        coeffs = [ZERO] * chart.dim
        coeffs[c] = ONE
        for p, sub in I._subst.items():
            # sub = dx_p restricted: dx_p ≡ Σ sub[c] dx_c on ker S
            coeffs[p] = sub.terms.get((c,), ZERO)
        frame.append(VectorField(chart, coeffs))
    return frame


def annihilator(chart: Chart, fields: Sequence[VectorField]) -> tuple:
    """1-forms vanishing on the span of ``fields``; returns (forms, loci)."""
    n = chart.dim
    if not fields:
        return tuple(chart.d(c) for c in chart.coords), ()
    rows = [list(X.coeffs) for X in fields]
    basis, loci = linalg.nullspace(rows, n, order=range(n - 1, -1, -1), zero=ZERO, one=ONE)
    forms = tuple(DForm(chart, 1, {(j,): v[j] for j in range(n)}) for v in basis)
    return forms, tuple(loci)


def independent_fields(fields: Sequence[VectorField]) -> tuple:
    """Greedy selection of a maximal independent subfamily (in input order)."""
    chosen: list = []
    red = None
    for X in fields:
        if X.is_zero:
            continue
        if red is None:
            red = linalg.SpanReducer(X.chart.dim)
        if red.add(X.coeffs):
            chosen.append(X)
    return chosen, tuple(red.loci) if red else ()


def span_reducer(fields: Sequence[VectorField], n: int) -> linalg.SpanReducer:
    return linalg.SpanReducer(n, [X.coeffs for X in fields])


def in_span(X: VectorField, fields: Sequence[VectorField]) -> bool:
    return span_reducer(fields, X.chart.dim).contains(X.coeffs)


# --------------------------------------------------------------------------
# derived systems
# --------------------------------------------------------------------------

def derived(S: PfaffSystem) -> PfaffSystem:
    """Annihilator of ``∂S``: combinations of generators with ``d`` in the ideal."""
    gens = S.generators
    if not gens:
        return S
    reduced = [reduce_mod(d(g), gens) for g in gens]
    keys = sorted({k for r in reduced for k in r.terms})
    rows = [[r.terms.get(k, ZERO) for r in reduced] for k in keys]
    m = len(gens)
    if not rows:
        return PfaffSystem(S.chart, gens, S.loci)
    basis, loci = linalg.nullspace(rows, m, zero=ZERO, one=ONE)
    new = []
    for v in basis:
        form = DForm.zero(S.chart, 1)
        for c, g in zip(v, gens):
            if c:
                form = form + g * c
        new.append(form)
    return PfaffSystem(S.chart, tuple(new), S.loci + tuple(loci))


def strong_flag(S: PfaffSystem, max_depth: int | None = None) -> "DerivedFlag":
    depth = S.chart.dim if max_depth is None else max_depth
    stages = [S]
    loci = list(S.loci)
    while len(stages) < depth + 1:
        nxt = derived(stages[-1])
        if nxt.rank == stages[-1].rank:
            break
        loci.extend(nxt.loci[len(stages[-1].loci):])
        stages.append(nxt)
    return DerivedFlag(stages=stages, mode="strong", ranks=tuple(s.rank for s in stages), loci=tuple(loci))


@dataclass
class DerivedFlag:
    stages: list
    mode: str
    ranks: tuple
    frames: list = field(default_factory=list)
    loci: tuple = ()

    @property
    def mu(self) -> int:
        return len(self.ranks)

    def to_json(self) -> dict:
        return {"mode": self.mode, "ranks": list(self.ranks),
                "degeneracy_loci": sorted({str(e) for e in self.loci})}


def weak_flag(S: PfaffSystem, max_depth: int | None = None) -> DerivedFlag:
    """Weak derived flag by bracketing a fixed dual frame of ``S``.

    ``frames[k]`` is a basis of the (k+1)-th stage; ``stages`` holds the
    corresponding annihilator systems.
    """
    depth = S.chart.dim if max_depth is None else max_depth
    if depth < 1:
        raise ValueError("max_depth must be at least 1")
    n = S.chart.dim
    base = dual_frame(S)
    frames = [list(base)]
    loci = list(S.loci)
    while len(frames) < depth and len(frames[-1]) < n:
        prev = frames[-1]
        candidates = list(prev)
        for X in base:
            for Y in prev:
                br = lie_bracket(X, Y)
                if not br.is_zero:
                    candidates.append(br)
        chosen, lc = independent_fields(candidates)
        loci.extend(lc)
        if len(chosen) == len(prev):
            break
        frames.append(chosen)
    stages = [S] + [None] * (len(frames) - 1)
    flag = DerivedFlag(stages=stages, mode="weak", ranks=tuple(len(f) for f in frames),
                       frames=frames, loci=tuple(_dedupe(loci)))
    return flag


def flag_stage_system(flag: DerivedFlag, k: int) -> PfaffSystem:
    """Annihilator system of stage ``k`` (0-based) of a weak flag."""
    if flag.stages[k] is None:
        chart = flag.frames[k][0].chart
        forms, loci = annihilator(chart, flag.frames[k])
        flag.stages[k] = PfaffSystem(chart, forms, tuple(loci))
    return flag.stages[k]


def _dedupe(items):
    seen, out = set(), []
    for e in items:
        if e not in seen and not e.is_constant:
            seen.add(e)
            out.append(e)
    return out


def bracket_compatible(flag: DerivedFlag) -> bool:
    """Check ``[D^{-p}, D^{-q}] ⊆ D^{-(p+q)}`` on basis fields of a weak flag."""
    frames = flag.frames
    mu = len(frames)
    n = frames[0][0].chart.dim if frames and frames[0] else 0
    reducers = [span_reducer(f, n) for f in frames]
    for p in range(1, mu + 1):
        for q in range(p, mu + 1):
            target = reducers[min(p + q, mu) - 1]
            if target.rank == n:
                continue
            for X in frames[p - 1]:
                for Y in frames[q - 1]:
                    br = lie_bracket(X, Y)
                    if not br.is_zero and not target.contains(br.coeffs):
                        return False
    return True


def annihilator_agrees(S: PfaffSystem) -> bool:
    """``derived(S)`` agrees with the second weak stage in rank and span."""
    D2 = derived(S)
    flag = weak_flag(S, max_depth=2)
    fields = flag.frames[-1] if flag.mu >= 2 else flag.frames[0]
    if D2.rank != len(fields):
        return False
    return all(not g(X) for g in D2.generators for X in fields)


# --------------------------------------------------------------------------
# Cauchy characteristics
# --------------------------------------------------------------------------

@dataclass
class CauchySystem:
    """Ch(S): spanning fields (inside S) and the annihilator system."""

    system: PfaffSystem
    fields: list
    loci: tuple = ()

    @property
    def rank(self) -> int:
        return len(self.fields)

    def as_system(self) -> PfaffSystem:
        forms, loci = annihilator(self.system.chart, self.fields)
        return PfaffSystem(self.system.chart, forms, tuple(loci))

    def to_json(self) -> dict:
        return {"rank": self.rank, "fields": [X.to_json() for X in self.fields],
                "degeneracy_loci": sorted({str(e) for e in self.loci})}


def cauchy_char(S: PfaffSystem) -> CauchySystem:
    frame = dual_frame(S)
    gens = S.generators
    if not gens:
        return CauchySystem(S, list(frame))
    cols = []
    for V in frame:
        parts = []
        for g in gens:
            parts.append(reduce_mod(interior(V, d(g)), gens))
        cols.append(parts)
    keys = sorted({(i, k) for col in cols for i, f in enumerate(col) for k in f.terms})
    rows = [[col[i].terms.get(k, ZERO) for col in cols] for i, k in keys]
    r = len(frame)
    if rows:
        basis, loci = linalg.nullspace(rows, r, zero=ZERO, one=ONE)
    else:
        basis = [[ONE if i == j else ZERO for i in range(r)] for j in range(r)]
        loci = []
    if basis:
        el = linalg.row_reduce(basis, r)
        basis = el.rows
    fields = []
    for v in basis:
        X = VectorField(S.chart, [ZERO] * S.chart.dim)
        for c, V in zip(v, frame):
            if c:
                X = X + V * c
        fields.append(X)
    return CauchySystem(S, fields, tuple(loci))


# --------------------------------------------------------------------------
# pointwise data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthVector:
    ranks: tuple

    def __iter__(self):
        return iter(self.ranks)

    def __eq__(self, other):
        if isinstance(other, GrowthVector):
            return self.ranks == other.ranks
        return self.ranks == tuple(other)

    def __hash__(self):
        return hash(self.ranks)


def _rank_at(fields: Sequence[VectorField], point: Mapping) -> int:
    if not fields:
        return 0
    return linalg.rank([list(X.at(point)) for X in fields])


def growth_at(S_or_flag, point: Mapping) -> GrowthVector:
    """Ranks of the weak flag stages at ``point``; degeneracies raise."""
    flag = S_or_flag if isinstance(S_or_flag, DerivedFlag) else weak_flag(S_or_flag)
    pt = {k: Fraction(v) for k, v in point.items()}
    ranks = []
    for k, fields in enumerate(flag.frames):
        r = _rank_at(fields, pt)
        if r != len(fields):
            bad = [e for e in flag.loci if evaluate(e, pt) == 0] if flag.loci else []
            raise DegeneracyError(f"stage {k + 1} drops from rank {len(fields)} to {r} at the point", bad)
        ranks.append(r)
    return GrowthVector(tuple(ranks))


def integral_element_map(S: PfaffSystem, frame: Sequence[VectorField], point: Mapping | None = None) -> tuple:
    """Matrix of ``η ↦ (dg(η))_g`` on the basis ``e_j ∧ e_k`` (j < k) of Λ²(span frame).

    Returns ``(matrix, pairs)``; entries are Exprs, or Fractions when a point
    is given.
    """
    pairs = list(combinations(range(len(frame)), 2))
    dg = [d(g) for g in S.generators]
    rows = []
    for w in dg:
        row = [w(frame[j], frame[k]) for j, k in pairs]
        if point is not None:
            row = [evaluate(e, point) for e in row]
        rows.append(row)
    return rows, pairs
