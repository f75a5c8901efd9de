"""Rank-2 prolongations of involutive (type I) systems.

The adapted coframe ``(ϖ₀, ϖ̂₁, ϖ̂₂, ω₁, ω₂, π)`` puts the restricted contact
system into the normal form

    dϖ₀ ≡ ω₁∧ϖ̂₁ + ω₂∧ϖ̂₂  (mod ϖ₀),   dϖ̂₁ ≡ 0,   dϖ̂₂ ≡ ω₂∧π.

Integral 2-planes of ``D`` then form the pencil ``π = aω₂`` (transversal
chart) or ``ω₂ = bπ`` (the chart containing the vertical planes).  The same
step repeats on each chart: the new structure equation ``dθ ≡ σ∧τ`` on the
canonical system feeds the next level.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from . import linalg
from .errors import DegeneracyError, PoleError, VerificationError, WrongTypeError
from .exterior import Chart, DForm, SmoothMap, VectorField, d, dual_basis, pullback, reduce_mod, wedge
from .jetclassify import RChart, fiber_matrix, generic_kernel_dim
from .pfaffian import PfaffSystem, derived, integral_element_map
from .symcore import ONE, ZERO, Expr, evaluate

TRANSVERSAL = "transversal"
NONTRANSVERSAL = "nontransversal"


# --------------------------------------------------------------------------
# adapted coframe
# --------------------------------------------------------------------------

@dataclass
class AdaptedCoframe:
    R: RChart
    w0: DForm
    w1h: DForm
    w2h: DForm
    omega1: DForm
    omega2: DForm
    pi: DForm
    scalings: dict = field(default_factory=dict)

    @property
    def generators(self) -> tuple:
        return (self.w0, self.w1h, self.w2h)

    @property
    def forms(self) -> tuple:
        return (self.w0, self.w1h, self.w2h, self.omega1, self.omega2, self.pi)

    def verify(self) -> dict:
        gens = self.generators
        checks = {
            "dw1h": reduce_mod(d(self.w1h), gens).is_zero,
            "dw2h": reduce_mod(d(self.w2h) - wedge(self.omega2, self.pi), gens).is_zero,
            "dw0": reduce_mod(d(self.w0) - wedge(self.omega1, self.w1h) - wedge(self.omega2, self.w2h),
                              [self.w0]).is_zero,
            "pi_vertical": self.pi(self.R.vertical) == ONE,
            "omega2_vertical": self.omega2(self.R.vertical).is_zero,
        }
        M = [[f.terms.get((j,), ZERO) for j in range(self.R.chart.dim)] for f in self.forms]
        checks["independent"] = linalg.rank(M, self.R.chart.dim) == self.R.chart.dim
        return checks

    def to_json(self) -> dict:
        return {
            "w0": str(self.w0), "w1h": str(self.w1h), "w2h": str(self.w2h),
            "omega1": str(self.omega1), "omega2": str(self.omega2), "pi": str(self.pi),
            "scalings": {k: str(v) for k, v in sorted(self.scalings.items())},
        }


def _comb(forms: Sequence[DForm], coeffs: Sequence[Expr]) -> DForm:
    out = DForm.zero(forms[0].chart, 1)
    for f, c in zip(forms, coeffs):
        if c:
            out = out + f * c
    return out


def factor_decomposable(w12: Expr, w13: Expr, w23: Expr) -> tuple:
    """Write ``w12 ξ∧η + w13 ξ∧μ + w23 η∧μ = σ∧τ``.

    Returns ``(α, β, γ, δ)`` with ``σ = αξ + βη`` and ``τ = μ + γξ + δη``.
    Constant divisors are preferred so the coefficients stay simple.
    """
    alpha, beta = w13, w23
    if alpha.is_zero and beta.is_zero:
        raise DegeneracyError("2-form has no component along the fiber direction")
    if w12.is_zero:
        return alpha, beta, ZERO, ZERO
    use_alpha = (not alpha.is_zero) and (alpha.is_constant or beta.is_zero or not beta.is_constant)
    if use_alpha:
        return alpha, beta, ZERO, w12 / alpha
    return alpha, beta, -(w12 / beta), ZERO


def adapted_coframe(R: RChart) -> AdaptedCoframe:
    """Normal-form coframe of a type I system; see the module docstring."""
    if generic_kernel_dim(R) != 2:
        raise WrongTypeError("not type I: the integral elements do not form a pencil")
    e1, e2, e3 = R.frame
    w1, w2 = R.w1, R.w2
    pairs = ((e1, e2), (e1, e3), (e2, e3))
    v1 = [d(w1)(X, Y) for X, Y in pairs]
    v2 = [d(w2)(X, Y) for X, Y in pairs]
    # find ϖ̂₁ = ϖ₁ − kϖ₂ (or ϖ₂ alone) with dϖ̂₁|_D = 0
    if not any(v2):
        C = [[ZERO, ONE], [ONE, ZERO]]
        k = None
    else:
        j = next(i for i, c in enumerate(v2) if c)
        k = v1[j] / v2[j]
        if any(a - k * b for a, b in zip(v1, v2)):
            raise WrongTypeError("not type I: no combination of ϖ₁, ϖ₂ is closed on D")
        C = [[ONE, -k], [ZERO, ONE]]
    w1h = _comb((w1, w2), C[0])
    w2h = _comb((w1, w2), C[1])
    # dϖ₀ = dx∧ϖ₁ + dy∧ϖ₂ = θ₁∧ϖ̂₁ + θ₂∧ϖ̂₂ with (ϖ₁, ϖ₂) = C⁻¹ (ϖ̂₁, ϖ̂₂)
    chart = R.chart
    dx, dy = chart.d("x"), chart.d("y")
    if d(R.w0) != wedge(dx, w1) + wedge(dy, w2):
        raise VerificationError("dϖ₀ ≠ dx∧ϖ₁ + dy∧ϖ₂", d(R.w0) - wedge(dx, w1) - wedge(dy, w2))
    Ci = linalg.inverse(C)
    theta1 = dx * Ci[0][0] + dy * Ci[1][0]
    theta2 = dx * Ci[0][1] + dy * Ci[1][1]
    # factor Ω = dϖ̂₂|_D as σ∧τ with σ ∝ θ₂ and τ(e₃) = 1
    Om = d(w2h)
    a_, b_, g_, dl_ = factor_decomposable(Om(e1, e2), Om(e1, e3), Om(e2, e3))
    sigma = dx * a_ + dy * b_
    if wedge(theta2, sigma):
        raise WrongTypeError("dϖ̂₂ is not divisible by the ω₂ direction")
    # σ = ν θ₂
    t2x, t2y = theta2.coeff("x"), theta2.coeff("y")
    nu = a_ / t2x if t2x else b_ / t2y
    if nu.is_zero:
        raise DegeneracyError("vertical pairing of π vanishes")
    m = R.system.parameter
    tau = chart.d(m) + dx * g_ + dy * dl_
    cf = AdaptedCoframe(
        R=R,
        w0=R.w0 * nu,
        w1h=w1h,
        w2h=w2h,
        omega1=theta1 * nu,
        omega2=theta2 * nu,
        pi=tau,
        scalings={"nu": nu, "k": k if k is not None else Expr.const(0), "swapped": Expr.const(int(k is None))},
    )
    bad = [n for n, ok in cf.verify().items() if not ok]
    if bad:
        raise VerificationError(f"adapted coframe fails {bad}")
    return cf


# --------------------------------------------------------------------------
# prolongation charts
# --------------------------------------------------------------------------

@dataclass(eq=False)
class ProlongChart:
    """One chart of a rank-2 prolongation.

    ``generators`` ends with ``theta``.  On the canonical system the forms
    ``(omega1, base, dfib)`` form a coframe, with dual fields ``frame``; the
    structure equation is ``dθ ≡ sigma_next ∧ tau_next`` and ``f`` is the
    ``ω₁``-coefficient of ``tau_next``.
    """

    level: int
    kind: str
    fiber: str
    parent_fiber: str
    chart: Chart
    generators: tuple
    theta: DForm
    omega1: DForm
    base: DForm
    sigma: DForm
    tau: DForm
    sigma_next: DForm
    tau_next: DForm
    f: Expr
    frame: list
    parent: "ProlongChart | None" = None
    scalings: dict = field(default_factory=dict)

    @cached_property
    def canonical(self) -> PfaffSystem:
        return PfaffSystem(self.chart, self.generators)

    @property
    def vertical(self) -> VectorField:
        return self.chart.partial(self.parent_fiber)

    @property
    def dfib(self) -> DForm:
        return self.chart.d(self.fiber)

    @property
    def path(self) -> str:
        tag = "T" if self.kind == TRANSVERSAL else "N"
        return (self.parent.path + "/" if self.parent else "") + tag

    def fiber_matrix(self, point: Mapping | None = None) -> list:
        rows, _ = integral_element_map(self.canonical, self.frame, point)
        return rows

    def tautological_plane(self, point: Mapping) -> list:
        """The integral 2-plane named by ``point``, as vectors on the parent chart."""
        parent_coords = self.chart.coords[:-1]
        out = []
        for X in self.frame[:2]:
            vals = X.at(point)
            out.append(tuple(vals[:len(parent_coords)]))
        return out

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "path": self.path,
            "coordinates": list(self.chart.coords),
            "fiber": self.fiber,
            "generators": [g.to_json() for g in self.generators],
            "theta": str(self.theta),
            "f_expr": str(self.f),
            "structure": {"sigma": str(self.sigma_next), "tau": str(self.tau_next)},
            "scalings": {k: str(v) for k, v in sorted(self.scalings.items())},
        }


def _fiber_name(kind: str, level: int) -> str:
    base = "a" if kind == TRANSVERSAL else "b"
    return base if level == 1 else f"{base}{level}"


def _child(parent_chart: Chart, gens: tuple, omega1: DForm, sigma: DForm, tau: DForm,
           parent_fiber: str, level: int, kind: str, parent=None, scalings=None) -> ProlongChart:
    name = _fiber_name(kind, level)
    if name in parent_chart.coords:
        raise ValueError(f"fiber coordinate {name} already in use")
    chart = Chart(parent_chart.coords + (name,))
    gens = tuple(g.to_chart(chart) for g in gens)
    omega1, sigma, tau = (f.to_chart(chart) for f in (omega1, sigma, tau))
    v = Expr.var(name)
    if kind == TRANSVERSAL:
        theta, base = tau - sigma * v, sigma
    else:
        theta, base = sigma - tau * v, tau
    dfib = chart.d(name)
    allg = gens + (theta,)
    full = list(allg) + [omega1, base, dfib]
    try:
        frame = dual_basis(full)[len(allg):]
    except DegeneracyError as ex:
        raise DegeneracyError(f"coframe on the {kind} chart at level {level} is degenerate") from ex
    X1, X2, X3 = frame
    for g in gens:
        dg = d(g)
        for A, B in ((X1, X2), (X1, X3), (X2, X3)):
            if dg(A, B):
                raise VerificationError("lower generators are not closed on the canonical system", dg(A, B))
    w = d(theta)
    al, be, ga, de = factor_decomposable(w(X1, X2), w(X1, X3), w(X2, X3))
    sig_n = omega1 * al + base * be
    tau_n = dfib + omega1 * ga + base * de
    return ProlongChart(level=level, kind=kind, fiber=name, parent_fiber=parent_fiber, chart=chart,
                        generators=allg, theta=theta, omega1=omega1, base=base, sigma=sigma, tau=tau,
                        sigma_next=sig_n, tau_next=tau_n, f=ga, frame=list(frame), parent=parent,
                        scalings=dict(scalings or {}))


@dataclass
class Transition:
    source: ProlongChart
    target: ProlongChart
    map: SmoothMap
    domain: str

    def to_json(self) -> dict:
        return {"source": self.source.path, "target": self.target.path, "domain": self.domain,
                "map": {n: str(c) for n, c in zip(self.map.target.coords, self.map.components)}}


def make_transition(T: ProlongChart, N: ProlongChart) -> Transition:
    """``(v, a) ↦ (v, b = 1/a)`` from the transversal chart to its sibling."""
    comps = [Expr.var(n) for n in T.chart.coords[:-1]] + [ONE / Expr.var(T.fiber)]
    return Transition(T, N, SmoothMap(T.chart, N.chart, tuple(comps)), f"{T.fiber} != 0")


def identity_transition(P: ProlongChart) -> Transition:
    return Transition(P, P, SmoothMap.identity(P.chart), "everywhere")


def transition_check(tr: Transition) -> dict:
    """Pull back the target generators and reduce modulo the source ideal."""
    residues = []
    for g in tr.target.generators:
        r = reduce_mod(pullback(tr.map, g), tr.source.generators)
        residues.append(r)
    ok = all(r.is_zero for r in residues)
    report = {"ok": ok, "residues": [str(r) for r in residues], "domain": tr.domain}
    if tr.source is not tr.target:
        # a ↦ 1/a ↦ a is the identity on a ≠ 0
        fib_img = tr.map.components[-1]
        back = ONE / fib_img
        report["projective_identity"] = back == Expr.var(tr.source.fiber)
        ok = ok and report["projective_identity"]
        report["ok"] = ok
    if not ok:
        bad = next((r for r in residues if not r.is_zero), None)
        raise VerificationError("transition does not preserve the canonical system", bad)
    return report


@dataclass
class Prolongation:
    R: RChart
    charts: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    coframe: AdaptedCoframe | None = None
    trivial: dict | None = None

    def chart(self, kind: str) -> ProlongChart:
        return next(c for c in self.charts if c.kind == kind)

    def to_json(self) -> dict:
        if self.trivial is not None:
            return {"kind": "trivial", "fiber": self.trivial}
        return {"kind": "pencil", "coframe": self.coframe.to_json(),
                "charts": [c.to_json() for c in self.charts],
                "transitions": [t.to_json() for t in self.transitions]}


def trivial_fiber(R: RChart) -> dict:
    L = fiber_matrix(R)
    basis, loci = linalg.nullspace(L, 3, zero=ZERO, one=ONE)
    dim = len(basis)
    transversal = dim == 1 and not basis[0][0].is_zero
    return {
        "generic_kernel_dim": dim,
        "kernel": [[str(c) for c in v] for v in basis],
        "transversal": transversal,
        "sigma_equals_R": dim == 1,
        "transversal_equals_sigma": dim == 1 and transversal,
        "loci": sorted({str(e) for e in loci}),
    }


def prolong(R: RChart) -> Prolongation:
    """Both charts and the transition for type I; the fiber report otherwise."""
    if generic_kernel_dim(R) != 2:
        return Prolongation(R, trivial=trivial_fiber(R))
    cf = adapted_coframe(R)
    m = R.system.parameter
    sc = {"nu": cf.scalings["nu"]}
    T = _child(R.chart, cf.generators, cf.omega1, cf.omega2, cf.pi, m, 1, TRANSVERSAL, scalings=sc)
    N = _child(R.chart, cf.generators, cf.omega1, cf.omega2, cf.pi, m, 1, NONTRANSVERSAL, scalings=sc)
    return Prolongation(R, [T, N], [make_transition(T, N)], coframe=cf)


def prolong_chart(P: ProlongChart) -> list:
    """Both charts of the prolongation of one chart's canonical system."""
    return [
        _child(P.chart, P.generators, P.omega1, P.sigma_next, P.tau_next, P.fiber, P.level + 1, kind, parent=P)
        for kind in (TRANSVERSAL, NONTRANSVERSAL)
    ]


# --------------------------------------------------------------------------
# strata and pointwise checks
# --------------------------------------------------------------------------

def stratify(P: ProlongChart, point: Mapping) -> str:
    """``Σ0`` if the tautological plane misses the vertical line, else ``Σ1``."""
    val = evaluate(P.theta(P.vertical), point)
    return "Σ1" if val == 0 else "Σ0"


def fiber_kernel_dim(P: ProlongChart, point: Mapping) -> int:
    """Dimension of the integral 2-vectors of the canonical system at ``point``."""
    rows = P.fiber_matrix(point)
    return 3 - linalg.rank(rows, 3)


def derived_matches_pullback(P: ProlongChart) -> bool:
    """The first derived system of the canonical system is the pullback of D."""
    D2 = derived(P.canonical)
    lower = P.generators[:-1]
    if len(D2.generators) != len(lower):
        return False
    return all(reduce_mod(g, lower).is_zero for g in D2.generators) and \
        all(reduce_mod(g, D2.generators).is_zero for g in lower)


def sample_point(P_or_chart, rng: random.Random, avoid_zero: Sequence[str] = (), lo: int = -5, hi: int = 5,
                 fixed: Mapping | None = None) -> dict:
    coords = P_or_chart.chart.coords if hasattr(P_or_chart, "chart") else P_or_chart.coords
    pt = {}
    for n in coords:
        if fixed and n in fixed:
            pt[n] = Fraction(fixed[n])
            continue
        while True:
            v = Fraction(rng.randint(lo, hi), rng.randint(1, 3))
            if v != 0 or n not in avoid_zero:
                break
        pt[n] = v
    return pt


def _usable(P: ProlongChart, pt: Mapping) -> bool:
    try:
        for X in P.frame:
            X.at(pt)
        for g in P.generators:
            g.at(pt)
        return True
    except PoleError:
        return False


def good_points(P: ProlongChart, n: int, seed: int = 0, fixed: Mapping | None = None) -> list:
    """``n`` random rational points of the chart away from poles and fiber zeros."""
    rng = random.Random(seed)
    fibers = [c for c in P.chart.coords if c[0] in "ab" and c not in ("x", "y")]
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 50 * n:
            raise DegeneracyError("could not find regular sample points")
        pt = sample_point(P, rng, avoid_zero=fibers + ["t"], fixed=fixed)
        if _usable(P, pt):
            out.append(pt)
    return out


@dataclass
class TowerLevel:
    level: int
    charts: list
    transitions: list
    fiber_dims: dict  # chart path -> list of kernel dims at the samples


def tower(R: RChart, depth: int, samples: int = 5, seed: int = 0) -> list:
    """Iterated prolongation; each level is checked at ``samples`` points per chart."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    first = prolong(R)
    if first.trivial is not None:
        raise WrongTypeError("tower needs a type I system")
    levels = []
    charts = first.charts
    trans = first.transitions
    for lvl in range(1, depth + 1):
        if lvl > 1:
            new_charts, trans = [], []
            for P in charts:
                T, N = prolong_chart(P)
                new_charts += [T, N]
                trans.append(make_transition(T, N))
            charts = new_charts
        dims = {}
        for i, P in enumerate(charts):
            pts = good_points(P, samples, seed=seed + 101 * lvl + i)
            dims[P.path] = [fiber_kernel_dim(P, pt) for pt in pts]
            bad = [k for k in dims[P.path] if k != 2]
            if bad:
                raise DegeneracyError(f"fiber kernel dimension {bad[0]} on chart {P.path}")
        for tr in trans:
            transition_check(tr)
        levels.append(TowerLevel(lvl, charts, trans, dims))
    return levels
