"""Pointwise symbol algebras of filtered manifolds.

Given a frame ``X_i`` adapted to a filtration (each ``X_i`` carries a
negative degree and ``F^{-k}`` is spanned by the fields of degree ``≥ -k``)
with dual coframe ``θ^i``, the bracket of the graded pieces at a point is

    [X_i, X_j] = Σ_k c^k_ij X_k,   c^k_ij = −dθ^k(X_i, X_j)(pt),

keeping only ``k`` with ``deg k = deg i + deg j``.  The pairing ``θ^k(X_j)``
is constant, so this is the 1-form identity
``dα(X, Y) = Xα(Y) − Yα(X) − α([X, Y])``; the direct bracket is used as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

from . import linalg
from .errors import DegeneracyError, VerificationError, WrongTypeError
from .exterior import Chart, DForm, d, dual_basis, lie_bracket
from .pfaffian import PfaffSystem
from .prolong import TRANSVERSAL, ProlongChart
from .symcore import ONE, Expr, evaluate


# --------------------------------------------------------------------------
# frames and filtrations
# --------------------------------------------------------------------------

@dataclass
class SymbolFrame:
    """Frame fields with their dual coframe, names and degrees."""

    chart: Chart
    fields: list
    coframe: list
    names: list
    degrees: list

    @classmethod
    def from_coframe(cls, coframe: Sequence[DForm], names: Sequence[str], degrees: Sequence[int]) -> "SymbolFrame":
        coframe = list(coframe)
        return cls(coframe[0].chart, dual_basis(coframe), coframe, list(names), list(degrees))

    def rescaled(self, units: Sequence[Expr]) -> "SymbolFrame":
        """Fields ``u_i X_i`` with coframe ``θ^i / u_i`` (another extension of the same vectors when u_i(pt) = 1)."""
        return SymbolFrame(self.chart, [X * u for X, u in zip(self.fields, units)],
                           [th * (ONE / u) for th, u in zip(self.coframe, units)], self.names, self.degrees)

    @property
    def depth(self) -> int:
        return -min(self.degrees)

    def filtration(self) -> "Filtration":
        stages = []
        for k in range(1, self.depth + 1):
            gens = tuple(th for th, deg in zip(self.coframe, self.degrees) if deg < -k)
            stages.append(PfaffSystem(self.chart, gens))
        return Filtration(self.chart, stages)


@dataclass
class Filtration:
    """``F^{-1} ⊂ F^{-2} ⊂ … ⊂ F^{-μ} = T`` given by annihilator systems."""

    chart: Chart
    stages: list

    @property
    def ranks(self) -> tuple:
        return tuple(s.rank for s in self.stages)

    def check_adapted(self, frame: SymbolFrame) -> None:
        for k, S in enumerate(self.stages, start=1):
            inside = [X for X, deg in zip(frame.fields, frame.degrees) if deg >= -k]
            if len(inside) != S.rank:
                raise WrongTypeError(f"frame has {len(inside)} fields of degree ≥ {-k}, stage rank is {S.rank}")
            for X in inside:
                if not S.contains_field(X):
                    raise WrongTypeError(f"frame field is not a section of F^{-k}")
        if self.stages and self.stages[-1].rank != self.chart.dim:
            raise WrongTypeError("last filtration stage must be the full tangent bundle")


# --------------------------------------------------------------------------
# graded algebras
# --------------------------------------------------------------------------

@dataclass
class GradedAlgebra:
    names: list
    degrees: list
    brackets: dict = field(default_factory=dict)  # (i, j) with i < j -> {k: Fraction}

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def dims(self) -> tuple:
        mu = -min(self.degrees) if self.degrees else 0
        return tuple(sum(1 for g in self.degrees if g == -p) for p in range(1, mu + 1))

    def piece(self, p: int) -> list:
        return [i for i, g in enumerate(self.degrees) if g == p]

    def bracket(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return dict(self.brackets.get((i, j), {}))
        return {k: -v for k, v in self.brackets.get((j, i), {}).items()}

    def bracket_vec(self, u: Sequence, v: Sequence) -> list:
        out = [Fraction(0)] * self.dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b or i == j:
                    continue
                for k, c in self.bracket(i, j).items():
                    out[k] += a * b * c
        return out

    def unit(self, i: int) -> list:
        return [Fraction(int(k == i)) for k in range(self.dim)]

    def jacobi_ok(self) -> bool:
        for i, j, k in combinations(range(self.dim), 3):
            X, Y, Z = self.unit(i), self.unit(j), self.unit(k)
            s = [a + b + c for a, b, c in zip(
                self.bracket_vec(self.bracket_vec(X, Y), Z),
                self.bracket_vec(self.bracket_vec(Y, Z), X),
                self.bracket_vec(self.bracket_vec(Z, X), Y))]
            if any(s):
                return False
        return True

    def grading_ok(self) -> bool:
        for (i, j), res in self.brackets.items():
            for k in res:
                if self.degrees[k] != self.degrees[i] + self.degrees[j]:
                    return False
        return True

    def table(self) -> list:
        """Nonzero brackets as ``(name_i, name_j, {name_k: coeff})``."""
        return [(self.names[i], self.names[j], {self.names[k]: v for k, v in sorted(res.items())})
                for (i, j), res in sorted(self.brackets.items())]

    def signed(self, signs: Sequence[int]) -> "GradedAlgebra":
        """Structure constants in the basis ``s_i X_i``."""
        out = {}
        for (i, j), res in self.brackets.items():
            out[(i, j)] = {k: v * signs[i] * signs[j] * signs[k] for k, v in res.items()}
        return GradedAlgebra(list(self.names), list(self.degrees), out)

    def same_constants(self, other: "GradedAlgebra") -> bool:
        return self.degrees == other.degrees and _clean(self.brackets) == _clean(other.brackets)

    def to_json(self) -> dict:
        items = []
        for (i, j), res in sorted(self.brackets.items()):
            items.append({
                "deg_pair": [self.degrees[i], self.degrees[j]],
                "basis_pair": [self.names[i], self.names[j]],
                "result_coeffs": {self.names[k]: str(v) for k, v in sorted(res.items())},
            })
        return {"names": self.names, "degrees": self.degrees, "dims": list(self.dims), "brackets": items}


def _clean(br: Mapping) -> dict:
    return {key: {k: v for k, v in res.items() if v} for key, res in br.items() if any(res.values())}


def _from_table(names: Sequence[str], degrees: Sequence[int], rels: Sequence[tuple]) -> GradedAlgebra:
    idx = {n: i for i, n in enumerate(names)}
    br: dict = {}
    for a, b, c in rels:
        i, j, k = idx[a], idx[b], idx[c]
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        br.setdefault((i, j), {})[k] = Fraction(sign)
    return GradedAlgebra(list(names), list(degrees), br)


DEGREES = [-1, -1, -1, -2, -3, -3, -4]
F0_NAMES = ["w1", "w2", "a", "pi", "1", "2", "0"]
F1_NAMES = ["w1", "pi", "b", "w2", "1", "2", "0"]
F0 = _from_table(F0_NAMES, DEGREES, [("a", "w2", "pi"), ("pi", "w2", "2"), ("1", "w1", "0"), ("2", "w2", "0")])
F1 = _from_table(F1_NAMES, DEGREES, [("b", "pi", "w2"), ("pi", "w2", "2"), ("1", "w1", "0")])
MODELS = {"f0": F0, "f1": F1}


def abelian(degrees: Sequence[int], names: Sequence[str] | None = None) -> GradedAlgebra:
    names = list(names) if names else [f"e{i}" for i in range(len(degrees))]
    return GradedAlgebra(names, list(degrees), {})


# --------------------------------------------------------------------------
# computing the symbol
# --------------------------------------------------------------------------

def structure_functions(frame: SymbolFrame) -> dict:
    """``{(i, j): {k: −dθ^k(X_i, X_j)}}`` as Exprs, all degrees kept."""
    dth = [d(th) for th in frame.coframe]
    out = {}
    n = len(frame.fields)
    for i, j in combinations(range(n), 2):
        Xi, Xj = frame.fields[i], frame.fields[j]
        res = {}
        for k, w in enumerate(dth):
            c = -w(Xi, Xj)
            if c:
                res[k] = c
        if res:
            out[(i, j)] = res
    return out


def filtration_compatible(frame: SymbolFrame, sf: Mapping | None = None) -> bool:
    """(M2): ``[F^p, F^q] ⊆ F^{p+q}`` on frame fields, identically."""
    sf = structure_functions(frame) if sf is None else sf
    deg = frame.degrees
    for (i, j), res in sf.items():
        for k in res:
            if deg[k] < deg[i] + deg[j]:
                return False
    return True


def graded_symbol(F: Filtration | None, pt: Mapping, frame: SymbolFrame, check: bool = True) -> GradedAlgebra:
    pt = {k: Fraction(v) for k, v in pt.items()}
    if F is not None:
        F.check_adapted(frame)
    sf = structure_functions(frame)
    if check and not filtration_compatible(frame, sf):
        raise VerificationError("filtration is not bracket compatible")
    deg = frame.degrees
    if linalg.rank([list(X.at(pt)) for X in frame.fields]) != len(frame.fields):
        raise DegeneracyError("frame is degenerate at the point")
    br: dict = {}
    for (i, j), res in sf.items():
        vals = {}
        for k, c in res.items():
            if deg[k] == deg[i] + deg[j]:
                v = evaluate(c, pt)
                if v:
                    vals[k] = v
        if vals:
            br[(i, j)] = vals
    g = GradedAlgebra(list(frame.names), list(deg), br)
    if check:
        _bracket_cross_check(frame, pt, g)
    return g


def _bracket_cross_check(frame: SymbolFrame, pt: Mapping, g: GradedAlgebra) -> None:
    deg = frame.degrees
    n = len(frame.fields)
    for i, j in combinations(range(n), 2):
        br = lie_bracket(frame.fields[i], frame.fields[j])
        for k, th in enumerate(frame.coframe):
            if deg[k] != deg[i] + deg[j]:
                continue
            v = evaluate(th(br), pt)
            if v != g.bracket(i, j).get(k, 0):
                raise VerificationError(f"bracket [{frame.names[i]}, {frame.names[j]}] disagrees with dθ")


# --------------------------------------------------------------------------
# invariants and model matching
# --------------------------------------------------------------------------

def generating_check(g: GradedAlgebra) -> bool:
    """True iff ``[g_p, g_{-1}] = g_{p-1}`` for every ``p < 0`` with ``g_{p-1} ≠ 0``."""
    mu = len(g.dims)
    minus1 = g.piece(-1)
    for p in range(-1, -mu, -1):
        target = g.piece(p - 1)
        if not target:
            continue
        vecs = []
        for i in g.piece(p):
            for j in minus1:
                v = g.bracket_vec(g.unit(i), g.unit(j))
                vecs.append([v[k] for k in target])
        if (linalg.rank(vecs, len(target)) if vecs else 0) != len(target):
            return False
    return True


def k_invariant(g: GradedAlgebra) -> int:
    """``dim {Y ∈ g_{-3} : [Y, g_{-1}] = 0}``."""
    m3 = g.piece(-3)
    rows = []
    for j in g.piece(-1):
        for k in range(g.dim):
            rows.append([g.bracket(i, j).get(k, Fraction(0)) for i in m3])
    r = linalg.rank(rows, len(m3)) if rows else 0
    return len(m3) - r


def table_match(g: GradedAlgebra, model: GradedAlgebra) -> tuple | None:
    """Signs ``s_i ∈ {±1}`` with ``g`` in basis ``s_i X_i`` equal to ``model``, or None."""
    if g.degrees != model.degrees:
        return None
    for signs in product((1, -1), repeat=g.dim):
        if g.signed(signs).same_constants(model):
            return signs
    return None


@dataclass
class ModelMatch:
    model: str
    k: int
    signs: tuple | None
    generating: bool

    @property
    def table_ok(self) -> bool:
        return self.signs is not None

    def to_json(self) -> dict:
        return {"model": self.model, "k": self.k, "generating": self.generating,
                "table_match": self.table_ok, "signs": list(self.signs) if self.signs else None}


def match_model(g: GradedAlgebra) -> ModelMatch:
    if g.dims != (3, 1, 2, 1):
        raise WrongTypeError(f"expected graded dims (3, 1, 2, 1), got {g.dims}")
    k = k_invariant(g)
    name = {0: "f0", 1: "f1"}.get(k, "neither")
    signs = table_match(g, MODELS[name]) if name in MODELS else None
    return ModelMatch(name, k, signs, generating_check(g))


# --------------------------------------------------------------------------
# prolongation charts
# --------------------------------------------------------------------------

def symbol_frame(P: ProlongChart) -> SymbolFrame:
    """Frame on a first-level chart ordered as (degree −1 | −2 | −3 | −4)."""
    if P.level != 1:
        raise WrongTypeError("symbol frames are defined on first prolongation charts")
    w0, w1h, w2h, theta = P.generators
    coframe = [P.omega1, P.base, P.tau_next, theta, w1h, w2h, w0]
    names = F0_NAMES if P.kind == TRANSVERSAL else F1_NAMES
    return SymbolFrame.from_coframe(coframe, names, DEGREES)


def chart_filtration(P: ProlongChart) -> Filtration:
    """``D̂ ⊂ ∂D̂ ⊂ {ϖ₀ = 0} ⊂ T``."""
    w0, w1h, w2h, theta = P.generators
    ch = P.chart
    return Filtration(ch, [PfaffSystem(ch, (w0, w1h, w2h, theta)), PfaffSystem(ch, (w0, w1h, w2h)),
                           PfaffSystem(ch, (w0,)), PfaffSystem(ch, ())])


def chart_symbol(P: ProlongChart, pt: Mapping, check: bool = True) -> GradedAlgebra:
    return graded_symbol(chart_filtration(P), pt, symbol_frame(P), check=check)
