"""Differential forms and vector fields on a coordinate chart.

A k-form is stored as a sparse map from strictly increasing index tuples to
nonzero :class:`~eds.symcore.Expr` coefficients, so ``dx_i ∧ dx_j`` with
``i < j`` is the key ``(i, j)``.  Evaluation on vector fields uses the
determinant convention ``(α∧β)(X, Y) = α(X)β(Y) − α(Y)β(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import linalg
from .errors import ChartMismatchError, DependentGeneratorsError
from .symcore import ONE, ZERO, Expr, as_expr, diff, evaluate, substitute


@dataclass(frozen=True)
class Chart:
    coords: tuple

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise ValueError(f"duplicate coordinates in {coords}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise ChartMismatchError(f"{name!r} is not a coordinate of {self.coords}") from None

    def d(self, name: str) -> "DForm":
        return DForm(self, 1, {(self.index(name),): ONE})

    def func(self, e) -> "DForm":
        return DForm(self, 0, {(): as_expr(e)})

    def partial(self, name: str) -> "VectorField":
        i = self.index(name)
        return VectorField(self, tuple(ONE if j == i else ZERO for j in range(self.dim)))

    def var(self, name: str) -> Expr:
        self.index(name)
        return Expr.var(name)

    def __str__(self):
        return "(" + ", ".join(self.coords) + ")"


def _sort_sign(idx: Sequence[int]) -> tuple:
    """Sort indices, returning (sign, sorted tuple); sign 0 on a repeat."""
    idx = list(idx)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return 0, ()
    return sign, tuple(idx)


class DForm:
    """Immutable differential form of fixed degree on a chart."""

    __slots__ = ("chart", "degree", "terms", "_hash")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[tuple, Expr] | None = None):
        self.chart = chart
        self.degree = degree
        clean = {}
        for k, v in (terms or {}).items():
            k = tuple(k)
            if len(k) != degree or any(b <= a for a, b in zip(k, k[1:])) or (k and not 0 <= k[0] <= k[-1] < chart.dim):
                raise ValueError(f"bad index tuple {k} for a {degree}-form on {chart}")
            v = as_expr(v)
            if v:
                clean[k] = v
        self.terms = clean
        self._hash = None

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DForm":
        return cls(chart, degree, {})

    @classmethod
    def one_form(cls, chart: Chart, coeffs: Mapping[str, object]) -> "DForm":
        return cls(chart, 1, {(chart.index(n),): as_expr(c) for n, c in coeffs.items()})

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "DForm"):
        if not isinstance(other, DForm):
            raise TypeError("expected a DForm")
        if other.chart != self.chart:
            raise ChartMismatchError(f"forms live on different charts {self.chart} and {other.chart}")

    def __add__(self, other):
        if not isinstance(other, DForm):
            return NotImplemented
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return DForm(self.chart, self.degree, out)

    def __neg__(self):
        return DForm(self.chart, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, DForm):
            return NotImplemented
        c = as_expr(c)
        return DForm(self.chart, self.degree, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        return (isinstance(other, DForm) and self.chart == other.chart
                and self.degree == other.degree and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, self.degree, frozenset(self.terms.items())))
        return self._hash

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coeff(self, *names: str) -> Expr:
        """Coefficient of ``d names[0] ∧ d names[1] ∧ ...`` (with sign for unsorted names)."""
        sign, key = _sort_sign([self.chart.index(n) for n in names])
        if not sign:
            return ZERO
        return self.terms.get(key, ZERO) * sign

    def scalar(self) -> Expr:
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.terms.get((), ZERO)

    # -- calculus -----------------------------------------------------------
    def d(self) -> "DForm":
        return d(self)

    def interior(self, X: "VectorField") -> "DForm":
        return interior(X, self)

    def __call__(self, *fields: "VectorField") -> Expr:
        """Evaluate the k-form on k vector fields."""
        if len(fields) != self.degree:
            raise ValueError(f"a {self.degree}-form takes {self.degree} vector fields")
        for X in fields:
            if X.chart != self.chart:
                raise ChartMismatchError("vector field on a different chart")
        total = ZERO
        for idx, c in self.terms.items():
            total = total + c * _det([[X.coeffs[i] for i in idx] for X in fields])
        return total

    def subs(self, bindings: Mapping[str, object]) -> "DForm":
        return DForm(self.chart, self.degree, {k: substitute(v, bindings) for k, v in self.terms.items()})

    def at(self, point: Mapping) -> "DForm":
        """Freeze coefficients at a point (constant-coefficient form)."""
        return DForm(self.chart, self.degree, {k: Expr.const(evaluate(v, point)) for k, v in self.terms.items()})

    def to_chart(self, chart: Chart) -> "DForm":
        """The same form expressed on a chart containing the same coordinate names."""
        if chart == self.chart:
            return self
        out = {}
        for k, v in self.terms.items():
            sign, key = _sort_sign([chart.index(self.chart.coords[i]) for i in k])
            out[key] = v * sign
        return DForm(chart, self.degree, out)

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "coords": list(self.chart.coords),
            "terms": [{"indices": list(k), "coeff": str(v)} for k, v in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping, chart: Chart | None = None) -> "DForm":
        if chart is None:
            chart = Chart(tuple(data["coords"]))
        return cls(chart, int(data["degree"]), {tuple(t["indices"]): as_expr(t["coeff"]) for t in data["terms"]})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, v in sorted(self.terms.items()):
            basis = "∧".join("d" + self.chart.coords[i] for i in k)
            if not basis:
                parts.append(f"({v})")
            elif v == 1:
                parts.append(basis)
            else:
                parts.append(f"({v})*{basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DForm<{self.degree}>({self})"


def _det(M: list) -> Expr:
    n = len(M)
    if n == 0:
        return ONE
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = ZERO
    for j in range(n):
        if M[0][j]:
            minor = [row[:j] + row[j + 1:] for row in M[1:]]
            term = M[0][j] * _det(minor)
            total = total + term if j % 2 == 0 else total - term
    return total


class VectorField:
    """Vector field ``Σ coeffs[i] ∂/∂coords[i]``."""

    __slots__ = ("chart", "coeffs", "_hash")

    def __init__(self, chart: Chart, coeffs: Sequence):
        coeffs = tuple(as_expr(c) for c in coeffs)
        if len(coeffs) != chart.dim:
            raise ValueError(f"expected {chart.dim} coefficients, got {len(coeffs)}")
        self.chart = chart
        self.coeffs = coeffs
        self._hash = None

    @classmethod
    def from_dict(cls, chart: Chart, comps: Mapping[str, object]) -> "VectorField":
        for n in comps:
            chart.index(n)
        return cls(chart, [comps.get(n, 0) for n in chart.coords])

    def __call__(self, f) -> Expr:
        """Directional derivative of a function."""
        f = as_expr(f)
        total = ZERO
        for name, c in zip(self.chart.coords, self.coeffs):
            if c:
                df = diff(f, name)
                if df:
                    total = total + c * df
        return total

    def _check(self, other):
        if not isinstance(other, VectorField):
            raise TypeError("expected a VectorField")
        if other.chart != self.chart:
            raise ChartMismatchError("vector fields on different charts")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.chart, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.coeffs])

    def __mul__(self, c):
        c = as_expr(c)
        return VectorField(self.chart, [a * c for a in self.coeffs])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.chart == other.chart and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, self.coeffs))
        return self._hash

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def component(self, name: str) -> Expr:
        return self.coeffs[self.chart.index(name)]

    def at(self, point: Mapping) -> tuple:
        return tuple(evaluate(c, point) for c in self.coeffs)

    def subs(self, bindings: Mapping[str, object]) -> "VectorField":
        return VectorField(self.chart, [substitute(c, bindings) for c in self.coeffs])

    def to_chart(self, chart: Chart) -> "VectorField":
        comps = dict(zip(self.chart.coords, self.coeffs))
        return VectorField.from_dict(chart, comps)

    def to_json(self) -> dict:
        return {n: str(c) for n, c in zip(self.chart.coords, self.coeffs) if c}

    def __str__(self):
        parts = [f"({c})*∂{n}" for n, c in zip(self.chart.coords, self.coeffs) if c]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"VectorField({self})"


@dataclass(frozen=True)
class SmoothMap:
    """Map ``source → target`` with target coordinates given in source variables."""

    source: Chart
    target: Chart
    components: tuple

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.target.dim:
            raise ValueError(f"expected {self.target.dim} components, got {len(comps)}")

    @classmethod
    def from_dict(cls, source: Chart, target: Chart, comps: Mapping[str, object]) -> "SmoothMap":
        missing = [n for n in target.coords if n not in comps]
        if missing:
            raise ValueError(f"missing components for {missing}")
        return cls(source, target, tuple(comps[n] for n in target.coords))

    @classmethod
    def identity(cls, chart: Chart) -> "SmoothMap":
        return cls(chart, chart, tuple(Expr.var(n) for n in chart.coords))

    def bindings(self) -> dict:
        return dict(zip(self.target.coords, self.components))

    def component(self, name: str) -> Expr:
        return self.components[self.target.index(name)]

    def pullback_function(self, f) -> Expr:
        return substitute(as_expr(f), self.bindings())

    def jacobian(self) -> list:
        """Rows indexed by target coordinates, columns by source coordinates."""
        return [[diff(c, s) for s in self.source.coords] for c in self.components]

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """``self ∘ inner``."""
        if inner.target != self.source:
            raise ChartMismatchError("composition chart mismatch")
        b = inner.bindings()
        return SmoothMap(inner.source, self.target, tuple(substitute(c, b) for c in self.components))


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def wedge(a: DForm, b: DForm) -> DForm:
    a._check(b)
    out: dict = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            sign, key = _sort_sign(ka + kb)
            if not sign:
                continue
            v = va * vb
            v = v if sign > 0 else -v
            out[key] = out[key] + v if key in out else v
    return DForm(a.chart, a.degree + b.degree, out)


def wedge_all(forms: Iterable[DForm]) -> DForm:
    forms = list(forms)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def d(a: DForm) -> DForm:
    out: dict = {}
    coords = a.chart.coords
    for k, v in a.terms.items():
        for name in v.variables:
            try:
                j = coords.index(name)
            except ValueError:
                continue
            if j in k:
                continue
            sign, key = _sort_sign((j,) + k)
            dv = diff(v, name)
            if not dv:
                continue
            dv = dv if sign > 0 else -dv
            out[key] = out[key] + dv if key in out else dv
    return DForm(a.chart, a.degree + 1, out)


def interior(X: VectorField, a: DForm) -> DForm:
    if a.degree < 1:
        raise ValueError("interior product needs a form of positive degree")
    if X.chart != a.chart:
        raise ChartMismatchError("vector field and form on different charts")
    out: dict = {}
    for k, v in a.terms.items():
        for m, i in enumerate(k):
            c = X.coeffs[i]
            if not c:
                continue
            key = k[:m] + k[m + 1:]
            term = v * c if m % 2 == 0 else -(v * c)
            out[key] = out[key] + term if key in out else term
    return DForm(a.chart, a.degree - 1, out)


def pullback(phi: SmoothMap, a: DForm) -> DForm:
    if a.chart != phi.target:
        raise ChartMismatchError("form does not live on the map's target chart")
    src = phi.source
    b = phi.bindings()
    jac = phi.jacobian()
    dphi = [DForm(src, 1, {(j,): jac[i][j] for j in range(src.dim)}) for i in range(phi.target.dim)]
    out = DForm.zero(src, a.degree)
    for k, v in a.terms.items():
        piece = DForm(src, 0, {(): substitute(v, b)})
        for i in k:
            piece = wedge(piece, dphi[i])
        out = out + piece
    return out


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    X._check(Y)
    return VectorField(X.chart, [X(yc) - Y(xc) for xc, yc in zip(X.coeffs, Y.coeffs)])


def pairing(a: DForm, X: VectorField) -> Expr:
    return a(X)


# --------------------------------------------------------------------------
# reduction modulo a Pfaffian ideal
# --------------------------------------------------------------------------

class PfaffIdeal:
    """Algebraic ideal generated by independent 1-forms.

    The generators are row reduced with pivots searched in reversed chart
    order, so the complementary coframe consists of the earliest coordinate
    differentials.  Each pivot differential is then expressed through the
    complement, which gives the normal form.
    """

    def __init__(self, generators: Sequence[DForm]):
        gens = tuple(generators)
        if not gens:
            raise ValueError("empty ideal; use the form itself")
        chart = gens[0].chart
        for g in gens:
            if g.chart != chart or g.degree != 1:
                raise ChartMismatchError("ideal generators must be 1-forms on one chart")
        self.chart = chart
        self.generators = gens
        n = chart.dim
        rows = [[g.terms.get((j,), ZERO) for j in range(n)] for g in gens]
        el = linalg.row_reduce(rows, n, order=range(n - 1, -1, -1))
        if el.rank < len(gens):
            raise DependentGeneratorsError("ideal generators are linearly dependent", el.loci)
        self.loci = tuple(el.loci)
        self.pivots = tuple(el.pivots)
        self.complement = tuple(j for j in range(n) if j not in el.pivots)
        # dx_pivot ≡ -Σ row[c] dx_c
        self._subst = {}
        for row, p in zip(el.rows, el.pivots):
            self._subst[p] = DForm(chart, 1, {(c,): -row[c] for c in self.complement if row[c]})

    def reduce(self, a: DForm) -> DForm:
        if a.chart != self.chart:
            a = a.to_chart(self.chart)
        if a.degree == 0:
            return a
        out = DForm.zero(self.chart, a.degree)
        acc: dict = {}
        for k, v in a.terms.items():
            if not any(i in self._subst for i in k):
                acc[k] = acc[k] + v if k in acc else v
                continue
            piece = DForm(self.chart, 0, {(): v})
            for i in k:
                piece = wedge(piece, self._subst[i] if i in self._subst else DForm(self.chart, 1, {(i,): ONE}))
                if not piece.terms:
                    break
            out = out + piece
        return out + DForm(self.chart, a.degree, acc)

    def contains(self, a: DForm) -> bool:
        return self.reduce(a).is_zero

    def complement_forms(self) -> list:
        return [DForm(self.chart, 1, {(c,): ONE}) for c in self.complement]


@lru_cache(maxsize=1024)
def _ideal(gens: tuple) -> PfaffIdeal:
    return PfaffIdeal(gens)


def reduce_mod(a: DForm, ideal: Sequence[DForm]) -> DForm:
    """Normal form of ``a`` modulo the algebraic ideal of the 1-forms ``ideal``."""
    if not ideal:
        return a
    return _ideal(tuple(ideal)).reduce(a)


def congruent(a: DForm, b: DForm, ideal: Sequence[DForm]) -> bool:
    return reduce_mod(a - b, ideal).is_zero


def coframe_components(a: DForm, coframe: Sequence[DForm]) -> dict:
    """Components of ``a`` in the wedge basis of a full coframe.

    Returns ``{(i, j, ...): coeff}`` with ``a = Σ coeff θ_i ∧ θ_j ∧ ...``.
    """
    frame = dual_basis(coframe)
    out = {}
    for idx in combinations(range(len(coframe)), a.degree):
        c = a(*[frame[i] for i in idx])
        if c:
            out[idx] = c
    return out


def dual_basis(coframe: Sequence[DForm]) -> list:
    """Vector fields ``E_j`` with ``θ_i(E_j) = δ_ij`` for a full coframe."""
    chart = coframe[0].chart
    n = chart.dim
    if len(coframe) != n:
        raise ValueError("a coframe needs exactly dim forms")
    M = [[th.terms.get((j,), ZERO) for j in range(n)] for th in coframe]
    try:
        inv = linalg.inverse(M)
    except ZeroDivisionError:
        raise DependentGeneratorsError("coframe is degenerate") from None
    return [VectorField(chart, [inv[i][j] for i in range(n)]) for j in range(n)]


def from_components(components: Mapping[tuple, Expr], coframe: Sequence[DForm]) -> DForm:
    chart = coframe[0].chart
    deg = len(next(iter(components))) if components else 0
    out = DForm.zero(chart, deg)
    for idx, c in components.items():
        piece = DForm(chart, 0, {(): c})
        for i in idx:
            piece = wedge(piece, coframe[i])
        out = out + piece
    return out
