"""Cartan's overdetermined system ``r = t³/3, s = t²/2``.

Covers the adapted coframe and the two prolongation charts, the leaf space
of the Cauchy characteristic with its (2,3,5) system, and two constructions
of singular solutions: integrating the graph equations on the chart
``(x, y, z, p, q, t, b)``, and sweeping integral curves of the (2,3,5)
system along the characteristic lines.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from . import linalg
from .errors import NonPolynomialError, VerificationError
from .exterior import Chart, SmoothMap, VectorField, pullback
from .jetclassify import RChart, SolvedSystem, build_chart, fiber_matrix, symbol_pencil
from .pfaffian import PfaffSystem, cauchy_char, weak_flag
from .prolong import NONTRANSVERSAL, TRANSVERSAL, Prolongation, adapted_coframe, prolong
from .symcore import ZERO, Expr, antiderive_poly, diff, evaluate, parse, poly_gcd, substitute

X, Y, Z, P, Q, T = (Expr.var(n) for n in ("x", "y", "z", "p", "q", "t"))
B_CHART = Chart(("x1", "x2", "x3", "x4", "x5"))
LEAF_SOURCE = Chart(("x1", "x2", "x3", "x4", "x5", "lam"))


def cartan_system() -> SolvedSystem:
    return SolvedSystem.create({"r": parse("t^3/3"), "s": parse("t^2/2")}, "t")


@lru_cache(maxsize=1)
def cartan_chart() -> RChart:
    return build_chart(cartan_system())


@lru_cache(maxsize=1)
def cartan_prolongation() -> Prolongation:
    return prolong(cartan_chart())


def ch_generator() -> VectorField:
    """The characteristic field written out by hand."""
    R = cartan_chart()
    return VectorField.from_dict(R.chart, {"x": 1, "y": -T, "z": P - T * Q, "p": -T ** 3 / 6, "q": -T ** 2 / 2})


# --------------------------------------------------------------------------
# coframe and covering
# --------------------------------------------------------------------------

def expected_forms() -> dict:
    R = cartan_chart()
    ch = R.chart
    dx, dy, dt = ch.d("x"), ch.d("y"), ch.d("t")
    return {
        "w1h": R.w1 - R.w2 * T,
        "omega1": dx,
        "omega2": dx * T + dy,
        "pi": dt,
    }


def expected_chart_forms() -> dict:
    prl = cartan_prolongation()
    Tc, Nc = prl.chart(TRANSVERSAL).chart, prl.chart(NONTRANSVERSAL).chart
    a, b = Expr.var("a"), Expr.var("b")
    return {
        "w_t": Tc.d("t") - Tc.d("x") * (T * a) - Tc.d("y") * a,
        "w_y": Nc.d("y") + Nc.d("x") * T - Nc.d("t") * b,
    }


def covering_check(pt: Mapping) -> bool:
    """Every integral element at ``pt`` with ``dy∧dt ≠ 0`` also has ``dx∧dt ≠ 0``."""
    R = cartan_chart()
    L = fiber_matrix(R, {k: Fraction(v) for k, v in pt.items()})
    # coefficients on (e1∧e2, e1∧e3, e2∧e3); dx∧dt ~ c13, dy∧dt ~ c23
    rows = L + [[Fraction(0), Fraction(1), Fraction(0)]]
    basis, _ = linalg.nullspace(rows, 3)
    return all(v[2] == 0 for v in basis)


def coframe_and_covering(n_points: int = 10, seed: int = 0) -> dict:
    R = cartan_chart()
    cf = adapted_coframe(R)
    exp = expected_forms()
    prl = cartan_prolongation()
    Tch, Nch = prl.chart(TRANSVERSAL), prl.chart(NONTRANSVERSAL)
    ec = expected_chart_forms()
    rng = random.Random(seed)
    pts = []
    for i in range(n_points):
        pt = {n: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for n in R.chart.coords}
        if i % 2 == 0:
            pt["t"] = Fraction(0)
        pts.append(pt)
    return {
        "coframe": cf.to_json(),
        "coframe_matches": {
            "w1h": cf.w1h == exp["w1h"],
            "omega1": cf.omega1 == exp["omega1"],
            "omega2": cf.omega2 == exp["omega2"],
            "pi": cf.pi == exp["pi"],
        },
        "chart_forms": {"w_t": str(Tch.theta), "w_y": str(Nch.theta)},
        "chart_forms_match": {"w_t": Tch.theta == ec["w_t"], "w_y": Nch.theta == ec["w_y"]},
        "f": {"transversal": str(Tch.f), "nontransversal": str(Nch.f)},
        "covering": [covering_check(pt) for pt in pts],
    }


# --------------------------------------------------------------------------
# leaf space of the characteristic and the (2,3,5) system
# --------------------------------------------------------------------------

@dataclass
class LeafChart:
    quotient: SmoothMap  # R → B
    lift: SmoothMap  # B × ℝ(λ) → R
    checks: dict = field(default_factory=dict)


QUOTIENT = {
    "x1": Z - X * P + X * Q * T + X ** 2 * T ** 3 / 6,
    "x2": P - Q * T + Y * T ** 2 / 2 + T ** 3 * X / 6,
    "x3": -Q + Y * T / 2,
    "x4": Y + X * T,
    "x5": -T,
}


def _lift_components() -> dict:
    x1, x2, x3, x4, x5, lam = (Expr.var(n) for n in LEAF_SOURCE.coords)
    return {
        "x": lam,
        "y": x4 + lam * x5,
        "z": x1 + lam * x2 - lam * x4 * x5 ** 2 / 2 - lam ** 2 * x5 ** 3 / 6,
        "p": x2 + x3 * x5 + lam * x5 ** 3 / 6,
        "q": -x3 - x4 * x5 / 2 - lam * x5 ** 2 / 2,
        "t": -x5,
    }


def leaf_chart() -> LeafChart:
    R = cartan_chart()
    quotient = SmoothMap.from_dict(R.chart, B_CHART, QUOTIENT)
    lift = SmoothMap.from_dict(LEAF_SOURCE, R.chart, _lift_components())
    Ch = ch_generator()
    q_ext = SmoothMap.from_dict(R.chart, LEAF_SOURCE, {**QUOTIENT, "lam": X})
    checks = {
        "annihilated": {n: Ch(e).is_zero for n, e in QUOTIENT.items()},
        "lift_after_quotient": lift.compose(q_ext) == SmoothMap.identity(R.chart),
        "quotient_after_lift": q_ext.compose(lift) == SmoothMap.identity(LEAF_SOURCE),
    }
    return LeafChart(quotient, lift, checks)


def db_forms() -> tuple:
    x3, x4, x5 = (Expr.var(n) for n in ("x3", "x4", "x5"))
    dx = [B_CHART.d(n) for n in B_CHART.coords]
    a1 = dx[0] + dx[3] * (x3 + x4 * x5 / 2)
    a2 = dx[1] + dx[4] * (x3 - x4 * x5 / 2)
    a3 = dx[2] + (dx[4] * x4 - dx[3] * x5) * Fraction(1, 2)
    return a1, a2, a3


def db_system() -> PfaffSystem:
    return PfaffSystem(B_CHART, db_forms())


def form_relations() -> dict:
    """``ϖ₀ = p*α₁ + x p*α₂``, ``ϖ₁ = p*α₂ − t p*α₃``, ``ϖ₂ = −p*α₃``.

    The middle relation with coefficient ``−x`` in place of ``−t`` fails; its
    residue is reported under ``w1_minus_x_residue``.
    """
    R = cartan_chart()
    qmap = leaf_chart().quotient
    a1, a2, a3 = (pullback(qmap, a) for a in db_forms())
    return {
        "w0": R.w0 == a1 + a2 * X,
        "w1": R.w1 == a2 - a3 * T,
        "w2": R.w2 == -a3,
        "w1_minus_x_residue": str(R.w1 - (a2 - a3 * X)),
    }


def db_report() -> dict:
    S = db_system()
    flag = weak_flag(S)
    return {"weak_flag": list(flag.ranks), "cauchy_rank": cauchy_char(S).rank, "relations": form_relations()}


# --------------------------------------------------------------------------
# singular solutions
# --------------------------------------------------------------------------

@dataclass
class SolutionSurface:
    source: Chart
    map: SmoothMap  # into the R chart
    lift: SmoothMap | None  # into the (x, y, z, p, q, t, b) chart
    free_function: Expr
    free_var: str
    warnings: list = field(default_factory=list)
    curve: SmoothMap | None = None
    rederivation: dict | None = None

    def components(self) -> dict:
        target = self.lift if self.lift is not None else self.map
        return {n: c for n, c in zip(target.target.coords, target.components)}

    def to_json(self, checks: Mapping | None = None) -> dict:
        out = {
            "parameters": list(self.source.coords),
            "components": {n: str(c) for n, c in self.components().items()},
            "free_function": str(self.free_function),
            "warnings": list(self.warnings),
        }
        if self.curve is not None:
            out["curve"] = {n: str(c) for n, c in zip(self.curve.target.coords, self.curve.components)}
        if self.rederivation is not None:
            out["rederivation"] = self.rederivation
        if checks is not None:
            out["checks"] = dict(checks)
        return out


def _require_poly(e: Expr, var: str) -> Expr:
    if not e.is_polynomial or not e.variables <= {var}:
        raise NonPolynomialError(f"free function must be a polynomial in {var}, got {e}")
    return e


def _origin_warning(e: Expr, var: str) -> list:
    if evaluate(diff(e, var), {var: 0}) != 0:
        return [f"derivative of the free function does not vanish at {var} = 0; "
                "the surface is integral but not singular at the origin"]
    return []


def closed_form_i(y0: Expr) -> dict:
    """Components of the approach (i) family from the closed formulas."""
    I1 = antiderive_poly(y0, "t")
    It = antiderive_poly(T * y0, "t")
    I2 = antiderive_poly(y0 * y0, "t")
    return {
        "x": X,
        "y": -T * X + y0,
        "z": X ** 2 * T ** 3 / 6 - X * (T ** 2 * y0 / 2 + It - T * I1) + T * y0 ** 2 / 2 + I2 / 2 - y0 * I1,
        "p": -T ** 3 * X / 6 + T ** 2 * y0 / 2 - It,
        "q": -T ** 2 * X / 2 + T * y0 - I1,
        "t": T,
        "b": -X + diff(y0, "t"),
    }


def _integrate_pair(ux: Expr, ut: Expr) -> Expr:
    """``u`` with ``u_x = ux``, ``u_t = ut`` and zero constants."""
    base = antiderive_poly(ux, "x")
    rest = ut - diff(base, "t")
    if "x" in rest.variables:
        raise VerificationError("graph equations are not compatible", rest)
    return base + antiderive_poly(rest, "t")


def rederive_i(y0: Expr) -> dict:
    """Integrate the graph equations one slot at a time."""
    y = -T * X + y0
    b = diff(y, "t")
    if diff(y, "x") != -T:
        raise VerificationError("y_x + t does not vanish")
    q = _integrate_pair(-T ** 2 / 2, b * T)
    p = _integrate_pair(-T ** 3 / 6, b * T ** 2 / 2)
    z = _integrate_pair(p - q * T, b * q)
    return {"x": X, "y": y, "z": z, "p": p, "q": q, "t": T, "b": b}


def solve_i(y0, allow_nonsingular: bool = True) -> SolutionSurface:
    y0 = _require_poly(parse(y0) if isinstance(y0, str) else y0, "t")
    warnings = _origin_warning(y0, "t")
    if warnings and not allow_nonsingular:
        raise VerificationError(warnings[0])
    comps = closed_form_i(y0)
    again = rederive_i(y0)
    mismatch = sorted(n for n in comps if comps[n] != again[n])
    src = Chart(("x", "t"))
    R = cartan_chart()
    N = cartan_prolongation().chart(NONTRANSVERSAL)
    lift = SmoothMap.from_dict(src, N.chart, comps)
    rmap = SmoothMap.from_dict(src, R.chart, {n: comps[n] for n in R.chart.coords})
    return SolutionSurface(src, rmap, lift, y0, "t", warnings, rederivation={"mismatched_slots": mismatch})


def integral_curve(phi: Expr) -> SmoothMap:
    """The curve ``x₄ = φ(τ), x₅ = τ`` with the other slots integrated (zero constants)."""
    tau = Expr.var("tau")
    dphi = diff(phi, "tau")
    Iphi = antiderive_poly(phi, "tau")
    comps = {
        "x1": antiderive_poly(dphi * Iphi - phi * dphi * tau, "tau"),
        "x2": antiderive_poly(Iphi, "tau"),
        "x3": -antiderive_poly(phi - tau * dphi, "tau") / 2,
        "x4": phi,
        "x5": tau,
    }
    return SmoothMap.from_dict(Chart(("tau",)), B_CHART, comps)


def solve_ii(phi, allow_nonsingular: bool = True) -> SolutionSurface:
    phi = _require_poly(parse(phi) if isinstance(phi, str) else phi, "tau")
    warnings = _origin_warning(phi, "tau")
    if warnings and not allow_nonsingular:
        raise VerificationError(warnings[0])
    curve = integral_curve(phi)
    residues = [pullback(curve, a) for a in db_forms()]
    if any(residues):
        raise VerificationError("curve is not integral for the (2,3,5) system", next(r for r in residues if r))
    src = Chart(("tau", "lam"))
    sweep_in = SmoothMap(src, LEAF_SOURCE, curve.components + (Expr.var("lam"),))
    lift = leaf_chart().lift
    rmap = lift.compose(sweep_in)
    # b from ω₂ = b π on the surface
    om2 = pullback(rmap, expected_forms()["omega2"])
    dt = pullback(rmap, cartan_chart().chart.d("t"))
    b = om2.coeff("tau") / dt.coeff("tau")
    if om2 - dt * b:
        raise VerificationError("surface is not tangent to a plane with ω₂ ∝ π")
    N = cartan_prolongation().chart(NONTRANSVERSAL)
    nlift = SmoothMap.from_dict(src, N.chart, {**rmap.bindings(), "b": b})
    return SolutionSurface(src, rmap, nlift, phi, "tau", warnings, curve=curve)


def _normalize(g: Expr, var: str) -> Expr:
    """Scale a polynomial so its leading coefficient in ``var`` is 1 when constant."""
    if g.is_zero or var not in g.variables:
        return g
    deg = g.degree(var)
    lc = ZERO
    for mono, c in g.num.items():
        if dict(mono).get(var, 0) == deg:
            lc = lc + Expr({tuple((n, k) for n, k in mono if n != var): c})
    return g / lc if lc.is_constant else g


def nonimmersion_minors(S: SolutionSurface) -> list:
    jac = [[diff(S.map.component(n), s) for s in S.source.coords] for n in ("x", "y", "z", "p", "q")]
    minors = []
    for i in range(5):
        for j in range(i + 1, 5):
            minors.append(jac[i][0] * jac[j][1] - jac[i][1] * jac[j][0])
    return minors


def verify_solution(S: SolutionSurface, samples: int = 5, seed: int = 0) -> dict:
    R = cartan_chart()
    pulls = {n: pullback(S.map, w) for n, w in zip(("w0", "w1", "w2"), R.forms)}
    report = {n: v.is_zero for n, v in pulls.items()}
    if S.lift is not None:
        N = cartan_prolongation().chart(NONTRANSVERSAL)
        report["w_y"] = pullback(S.lift, N.theta).is_zero
    minors = nonimmersion_minors(S)
    g = poly_gcd(minors)
    principal = any(m and (m / g).is_constant for m in minors) if not g.is_zero else False
    first = S.source.coords[0]
    g = _normalize(g, first)
    origin = {n: 0 for n in S.source.coords}
    through = (not g.is_zero) and evaluate(g, origin) == 0
    # immersion at points off the locus
    rng = random.Random(seed)
    regular = []
    tries = 0
    while len(regular) < samples and tries < 200:
        tries += 1
        pt = {n: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for n in S.source.coords}
        if g.is_zero or evaluate(g, pt) == 0:
            continue
        regular.append(any(evaluate(m, pt) != 0 for m in minors))
    return {
        "pullbacks_zero": all(report.values()),
        "pullbacks": report,
        "nonimmersion_locus": str(g),
        "locus_principal": principal,
        "through_origin": through,
        "immersion_at_samples": all(regular) and len(regular) == samples,
        "warnings": list(S.warnings),
    }


def locus_expr(S: SolutionSurface) -> Expr:
    return _normalize(poly_gcd(nonimmersion_minors(S)), S.source.coords[0])


def compare_solutions(y0) -> bool:
    """Approach (ii) with ``φ(τ) = y₀(−τ)`` equals approach (i) after ``τ = −t, λ = x``."""
    y0 = parse(y0) if isinstance(y0, str) else y0
    phi = substitute(y0, {"t": -Expr.var("tau")})
    s1 = solve_i(y0)
    s2 = solve_ii(phi)
    ident = {"tau": -T, "lam": X}
    c1, c2 = s1.components(), s2.components()
    return all(substitute(c2[n], ident) == c1[n] for n in c1)


def cartan_summary() -> dict:
    R = cartan_chart()
    ch = cauchy_char(R.pfaff)
    return {
        "delta": str(symbol_pencil(cartan_system()).delta),
        "cauchy_rank": ch.rank,
        "cauchy_generator_matches": ch.rank == 1 and ch.fields[0] == ch_generator(),
    }
