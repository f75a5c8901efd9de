"""Second-order systems in solved form and their pointwise type.

A solved system fixes two of the second derivatives ``r, s, t`` as rational
functions of ``(x, y, z, p, q, m)`` where ``m`` is the remaining one.  The
locus ``R`` is then the chart ``(x, y, z, p, q, m)`` carrying the restricted
contact forms.  Integral 2-planes of ``D`` at a point are read off as the
kernel of ``η ↦ (dϖ₁(η), dϖ₂(η))`` on ``Λ²D``, which is 3-dimensional, so
every 2-vector there is a plane.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from . import linalg
from .errors import DegeneracyError, InputError, VerificationError
from .exterior import Chart, DForm, VectorField
from .pfaffian import PfaffSystem, cauchy_char, dual_frame, integral_element_map
from .symcore import Expr, as_expr, diff, evaluate, substitute

SECOND = ("r", "s", "t")
FIRST = ("x", "y", "z", "p", "q")
SWAP_XY = {"x": "y", "y": "x", "p": "q", "q": "p", "r": "t", "t": "r"}


@dataclass(frozen=True)
class SolvedSystem:
    """``{u = f, v = g}`` with ``u, v`` two of ``r, s, t``; the third is the parameter."""

    solved: tuple  # ((name, Expr), (name, Expr)) sorted by name
    parameter: str

    def __post_init__(self):
        solved = tuple(sorted((str(k), as_expr(v)) for k, v in dict(self.solved).items()))
        object.__setattr__(self, "solved", solved)
        names = [k for k, _ in solved]
        if len(names) != 2 or not set(names) <= set(SECOND):
            raise InputError(f"exactly two of r, s, t must be solved, got {names}")
        rest = [v for v in SECOND if v not in names]
        if self.parameter != rest[0]:
            raise InputError(f"parameter must be {rest[0]!r}, got {self.parameter!r}")
        allowed = set(FIRST) | {self.parameter}
        for k, e in solved:
            extra = e.variables - allowed
            if extra:
                raise InputError(f"{k} = {e} involves {sorted(extra)}; only {sorted(allowed)} are allowed")

    @classmethod
    def create(cls, solved: Mapping[str, object], parameter: str | None = None) -> "SolvedSystem":
        if parameter is None:
            rest = [v for v in SECOND if v not in solved]
            parameter = rest[0] if len(rest) == 1 else ""
        return cls(tuple(solved.items()), parameter)

    @classmethod
    def from_json(cls, data: Mapping) -> "SolvedSystem":
        if not isinstance(data, Mapping) or "solved" not in data:
            raise InputError("system JSON needs a 'solved' object")
        solved = data["solved"]
        if not isinstance(solved, Mapping):
            raise InputError("'solved' must map variable names to expression strings")
        return cls.create({k: as_expr(v) for k, v in solved.items()}, data.get("parameter"))

    def to_json(self) -> dict:
        return {"solved": {k: str(v) for k, v in self.solved}, "parameter": self.parameter}

    def value(self, name: str) -> Expr:
        """Expression substituted for ``r``, ``s`` or ``t`` on ``R``."""
        for k, v in self.solved:
            if k == name:
                return v
        return Expr.var(name)

    @property
    def solved_dict(self) -> dict:
        return dict(self.solved)

    def swap_xy(self) -> "SolvedSystem":
        """Relabel ``x ↔ y`` (hence ``p ↔ q`` and ``r ↔ t``)."""
        b = {k: Expr.var(v) for k, v in SWAP_XY.items()}
        return SolvedSystem.create({SWAP_XY.get(k, k): substitute(v, b) for k, v in self.solved},
                                   SWAP_XY.get(self.parameter, self.parameter))


@dataclass(frozen=True)
class RChart:
    system: SolvedSystem
    chart: Chart
    w0: DForm
    w1: DForm
    w2: DForm
    vertical: VectorField

    @property
    def forms(self) -> tuple:
        return (self.w0, self.w1, self.w2)

    @cached_property
    def pfaff(self) -> PfaffSystem:
        return PfaffSystem(self.chart, self.forms)

    @cached_property
    def frame(self) -> list:
        """``(e₁, e₂, e₃)`` spanning D with ``e₃`` the vertical field."""
        fr = dual_frame(self.pfaff)
        m = self.system.parameter
        names = [self.chart.coords[i] for i in self.pfaff.ideal.complement]
        if names != ["x", "y", m]:
            raise DegeneracyError(f"unexpected complement {names} for the restricted contact system")
        if fr[2] != self.vertical:
            raise VerificationError("vertical field does not match the dual frame")
        return fr

    def with_forms(self, w1: DForm, w2: DForm) -> "RChart":
        """Same chart with ``(ϖ₁, ϖ₂)`` replaced, e.g. by a linear mix."""
        return replace(self, w1=w1, w2=w2)

    def to_json(self) -> dict:
        return {"coords": list(self.chart.coords), "system": self.system.to_json(),
                "forms": {"w0": self.w0.to_json(), "w1": self.w1.to_json(), "w2": self.w2.to_json()},
                "vertical": self.vertical.to_json()}


def build_chart(sys: SolvedSystem) -> RChart:
    m = sys.parameter
    chart = Chart(FIRST + (m,))
    dx, dy, dz, dp, dq = (chart.d(n) for n in FIRST)
    p, q = Expr.var("p"), Expr.var("q")
    r, s, t = (sys.value(v) for v in SECOND)
    w0 = dz - dx * p - dy * q
    w1 = dp - dx * r - dy * s
    w2 = dq - dx * s - dy * t
    return RChart(sys, chart, w0, w1, w2, chart.partial(m))


# --------------------------------------------------------------------------
# regularity
# --------------------------------------------------------------------------

def gradient_matrix(F, G) -> list:
    return [[diff(as_expr(H), v) for v in SECOND] for H in (F, G)]


def regularity_check(sys: SolvedSystem, pts: Sequence[Mapping] = ()) -> dict:
    """Rank of the ``(r, s, t)``-gradients of ``F = u − f``, ``G = v − g``."""
    (u, f), (v, g) = sys.solved
    F = Expr.var(u) - f
    G = Expr.var(v) - g
    M = gradient_matrix(F, G)
    iu, iv = SECOND.index(u), SECOND.index(v)
    minor = M[0][iu] * M[1][iv] - M[0][iv] * M[1][iu]
    return {
        "rank": 2,
        "identically_satisfied": minor.is_constant and not minor.is_zero,
        "block": [u, v],
        "minor": str(minor),
        "point_ranks": [linalg.rank(linalg.evaluate_matrix(M, pt)) for pt in pts],
    }


def regularity_check_raw(F, G, pts: Sequence[Mapping]) -> dict:
    """Regularity report for a raw pair ``F, G`` on ``J²`` (points include r, s, t)."""
    M = gradient_matrix(F, G)
    ranks = [linalg.rank(linalg.evaluate_matrix(M, pt)) for pt in pts]
    return {"generic_rank": linalg.rank(M), "point_ranks": ranks, "regular": all(r == 2 for r in ranks)}


# --------------------------------------------------------------------------
# fiber of integral elements
# --------------------------------------------------------------------------

PAIRS = ((0, 1), (0, 2), (1, 2))  # e1∧e2, e1∧e3, e2∧e3


@dataclass
class FiberDescriptor:
    point: dict
    kernel_dim: int
    generic_kernel_dim: int
    kernel_basis: list  # coefficient triples on e1∧e2, e1∧e3, e2∧e3
    transversal: list  # per basis element: True iff the plane avoids the vertical line
    matrix: list

    @property
    def has_transversal(self) -> bool:
        return any(self.transversal)

    @property
    def has_nontransversal(self) -> bool:
        # the kernel contains a vertical-containing plane iff some element has c12 = 0
        return self.kernel_dim >= 2 or any(not t for t in self.transversal)

    @property
    def transversal_fiber(self) -> str:
        """Shape of the set of transversal integral elements."""
        if not self.has_transversal:
            return "empty"
        return {1: "point", 2: "line"}.get(self.kernel_dim, "plane")

    def to_json(self) -> dict:
        return {
            "point": {k: str(v) for k, v in sorted(self.point.items())},
            "kernel_dim": self.kernel_dim,
            "generic_kernel_dim": self.generic_kernel_dim,
            "kernel_basis": [[str(c) for c in v] for v in self.kernel_basis],
            "transversal": list(self.transversal),
            "transversal_fiber": self.transversal_fiber,
        }


def _point(pt: Mapping) -> dict:
    return {k: Fraction(v) for k, v in pt.items()}


def fiber_matrix(R: RChart, pt: Mapping | None = None, with_w0: bool = False) -> list:
    S = PfaffSystem(R.chart, R.forms if with_w0 else (R.w1, R.w2))
    rows, _ = integral_element_map(S, R.frame, pt)
    return rows


def generic_kernel_dim(R: RChart) -> int:
    return 3 - linalg.rank(fiber_matrix(R), 3)


def fiber_at(R: RChart, pt: Mapping) -> FiberDescriptor:
    pt = _point(pt)
    L0 = fiber_matrix(R, pt, with_w0=True)
    L = L0[1:]
    basis, _ = linalg.nullspace(L, 3)
    if any(sum(a * b for a, b in zip(L0[0], v)) for v in basis):
        raise VerificationError("dϖ₀ does not vanish on an integral element candidate")
    if basis:
        basis = linalg.row_reduce(basis, 3).rows
    return FiberDescriptor(
        point=pt,
        kernel_dim=len(basis),
        generic_kernel_dim=generic_kernel_dim(R),
        kernel_basis=basis,
        transversal=[v[0] != 0 for v in basis],
        matrix=L,
    )


def transversal_fiber(R: RChart, pt: Mapping) -> str:
    return fiber_at(R, pt).transversal_fiber


def first_prolongation_is_sigma(R: RChart, pt: Mapping) -> bool:
    """Whether every integral element at ``pt`` is transversal.

    A projective line of integral elements always has exactly one member
    containing the vertical direction, so this only happens for a single
    transversal element.
    """
    fb = fiber_at(R, pt)
    return fb.kernel_dim >= 1 and not fb.has_nontransversal


# --------------------------------------------------------------------------
# symbol pencil
# --------------------------------------------------------------------------

@dataclass
class SymbolPencil:
    qF: tuple
    qG: tuple
    disc_coeffs: tuple  # (P, Q, S): disc(λQ_F + μQ_G) = Pλ² + Qλμ + Sμ²
    delta: Expr

    def to_json(self) -> dict:
        return {"QF": [str(c) for c in self.qF], "QG": [str(c) for c in self.qG],
                "disc": [str(c) for c in self.disc_coeffs], "delta": str(self.delta)}


def symbol_pencil(sys: SolvedSystem) -> SymbolPencil:
    (u, f), (v, g) = sys.solved
    F = Expr.var(u) - f
    G = Expr.var(v) - g
    qF = tuple(diff(F, w) for w in SECOND)
    qG = tuple(diff(G, w) for w in SECOND)
    # A = λF_r + μG_r etc.; B² − 4AC as a binary quadratic in (λ, μ)
    (Fr, Fs, Ft), (Gr, Gs, Gt) = qF, qG
    P = Fs * Fs - 4 * Fr * Ft
    Q = 2 * Fs * Gs - 4 * (Fr * Gt + Gr * Ft)
    S = Gs * Gs - 4 * Gr * Gt
    return SymbolPencil(qF, qG, (P, Q, S), Q * Q - 4 * P * S)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeLabel:
    label: str  # "I" | "II" | "III" | "IV" | "Degenerate"
    reason: str = ""

    def __str__(self):
        return self.label if not self.reason else f"{self.label}({self.reason})"

    def __eq__(self, other):
        if isinstance(other, str):
            return self.label == other
        return isinstance(other, TypeLabel) and self.label == other.label and self.reason == other.reason

    def __hash__(self):
        return hash((self.label, self.reason))


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def classify_type(R: RChart, pt: Mapping, sys: SolvedSystem | None = None) -> TypeLabel:
    sys = sys or R.system
    fb = fiber_at(R, pt)
    if fb.kernel_dim != fb.generic_kernel_dim:
        return TypeLabel("Degenerate", f"kernel dimension jumps from {fb.generic_kernel_dim} to {fb.kernel_dim}")
    if fb.kernel_dim == 2:
        return TypeLabel("I")
    if fb.kernel_dim == 1:
        if not fb.transversal[0]:
            return TypeLabel("IV")
        s = _sign(evaluate(symbol_pencil(sys).delta, fb.point))
        if s > 0:
            return TypeLabel("II")
        if s < 0:
            return TypeLabel("III")
        return TypeLabel("Degenerate", "pencil discriminant vanishes")
    if fb.kernel_dim == 0:
        return TypeLabel("Degenerate", "no integral elements")
    return TypeLabel("Degenerate", "every plane of D is integral")


def classification_report(R: RChart, pt: Mapping, cauchy_rank: int | None = None) -> dict:
    fb = fiber_at(R, pt)
    label = classify_type(R, pt)
    pencil = symbol_pencil(R.system)
    if cauchy_rank is None:
        cauchy_rank = cauchy_char(R.pfaff).rank
    delta_val = evaluate(pencil.delta, fb.point)
    reg = regularity_check(R.system)
    consistent = (label.label == "I") == (cauchy_rank == 1) if label.label != "Degenerate" else None
    return {
        "type": label.label,
        "reason": label.reason,
        "kernel_dim": fb.kernel_dim,
        "generic_kernel_dim": fb.generic_kernel_dim,
        "transversal": fb.transversal,
        "transversal_fiber": fb.transversal_fiber,
        "delta": str(pencil.delta),
        "delta_sign": _sign(delta_val),
        "cauchy_rank": cauchy_rank,
        "cauchy_consistent": consistent,
        "certificates": {
            "minors": {"regularity": reg["minor"], "fiber_matrix": [[str(c) for c in r] for r in fiber_matrix(R)]},
            "loci": sorted({str(e) for e in R.pfaff.ideal.loci}),
        },
    }
