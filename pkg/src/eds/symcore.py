"""Exact multivariate rational functions over Q.

An :class:`Expr` is a reduced fraction ``num/den`` of sparse polynomials.
Polynomials are dicts mapping a monomial (a name-sorted tuple of
``(variable, exponent)`` pairs) to a nonzero :class:`~fractions.Fraction`.
Denominators are kept monic with respect to graded-lex order (variables
compared alphabetically), so structural equality is mathematical equality.

Multivariate gcds are delegated to :mod:`sympy`'s sparse polynomial rings;
everything else is plain Python on dicts.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .errors import NonPolynomialError, ParseError, PoleError, UnboundVariableError

Monomial = tuple  # tuple[tuple[str, int], ...]
Poly = dict  # dict[Monomial, Fraction]

IDENT = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")

_ONE_MONO: Monomial = ()


# --------------------------------------------------------------------------
# sparse polynomial kernels
# --------------------------------------------------------------------------

def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for n, k in b:
        d[n] = d.get(n, 0) + k
    return tuple(sorted(d.items()))


def _padd(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = dict(p)
    for m, c in q.items():
        v = out.get(m)
        if v is None:
            out[m] = c
        else:
            v += c
            if v:
                out[m] = v
            else:
                del out[m]
    return out


def _pneg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def _pscale(p: Poly, c: Fraction) -> Poly:
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def _pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return {}
    if len(p) == 1 and _ONE_MONO in p:
        return _pscale(q, p[_ONE_MONO])
    if len(q) == 1 and _ONE_MONO in q:
        return _pscale(p, q[_ONE_MONO])
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _pdiff(p: Poly, v: str) -> Poly:
    out: Poly = {}
    for m, c in p.items():
        for i, (n, k) in enumerate(m):
            if n == v:
                nm = m[:i] + ((n, k - 1),) + m[i + 1:] if k > 1 else m[:i] + m[i + 1:]
                out[nm] = out.get(nm, 0) + c * k
                break
    return {m: c for m, c in out.items() if c}


def _pint(p: Poly, v: str) -> Poly:
    out: Poly = {}
    for m, c in p.items():
        d = dict(m)
        k = d.get(v, 0)
        d[v] = k + 1
        out[tuple(sorted(d.items()))] = c / (k + 1)
    return out


def _pvars(p: Poly) -> set:
    return {n for m in p for n, _ in m}


def _is_const(p: Poly) -> bool:
    return not p or (len(p) == 1 and _ONE_MONO in p)


def _const_of(p: Poly) -> Fraction:
    return p.get(_ONE_MONO, Fraction(0))


def _mono_key(m: Monomial, names: tuple) -> tuple:
    d = dict(m)
    return (sum(d.values()),) + tuple(d.get(n, 0) for n in names)


def _sorted_terms(p: Poly) -> list:
    names = tuple(sorted(_pvars(p)))
    return sorted(p.items(), key=lambda mc: _mono_key(mc[0], names), reverse=True)


def _lead_coeff(p: Poly) -> Fraction:
    names = tuple(sorted(_pvars(p)))
    m = max(p, key=lambda m: _mono_key(m, names))
    return p[m]


@lru_cache(maxsize=512)
def _ring(names: tuple) -> PolyRing:
    return PolyRing(names, QQ, grlex)


def _to_sympy(p: Poly, names: tuple, R: PolyRing):
    idx = {n: i for i, n in enumerate(names)}
    d = {}
    for m, c in p.items():
        e = [0] * len(names)
        for n, k in m:
            e[idx[n]] = k
        d[tuple(e)] = QQ(c.numerator, c.denominator)
    return R.from_dict(d)


def _from_sympy(sp, names: tuple) -> Poly:
    out: Poly = {}
    for e, c in sp.terms():
        m = tuple((names[i], k) for i, k in enumerate(e) if k)
        out[m] = Fraction(int(c.numerator), int(c.denominator))
    return out


def _cofactors(p: Poly, q: Poly) -> tuple:
    """Return ``(g, p/g, q/g)`` with ``g`` the monic gcd."""
    names = tuple(sorted(_pvars(p) | _pvars(q)))
    if not names:
        return {(): Fraction(1)}, p, q
    R = _ring(names)
    g, a, b = _to_sympy(p, names, R).cofactors(_to_sympy(q, names, R))
    return _from_sympy(g, names), _from_sympy(a, names), _from_sympy(b, names)


def _poly_str(p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for m, c in _sorted_terms(p):
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in m)
        if not mono:
            s = str(c)
        elif c == 1:
            s = mono
        elif c == -1:
            s = "-" + mono
        else:
            s = f"{c}*{mono}"
        if not parts:
            parts.append(s)
        elif s.startswith("-"):
            parts.append(" - " + s[1:])
        else:
            parts.append(" + " + s)
    return "".join(parts)


# --------------------------------------------------------------------------
# Expr
# --------------------------------------------------------------------------

Number = Union[int, Fraction, Rational]


class Expr:
    """Immutable reduced rational function with rational coefficients."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, *, _reduced: bool = False):
        if den is None:
            den = {(): Fraction(1)}
        if not den:
            raise PoleError("division by the zero polynomial")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, q: Number) -> "Expr":
        q = Fraction(q)
        return cls({(): q} if q else {}, _reduced=True)

    @classmethod
    def var(cls, name: str) -> "Expr":
        if not IDENT.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        return cls({((name, 1),): Fraction(1)}, _reduced=True)

    @classmethod
    def parse(cls, text: str) -> "Expr":
        return parse(text)

    # -- inspection ---------------------------------------------------------
    @property
    def variables(self) -> frozenset:
        return frozenset(_pvars(self.num) | _pvars(self.den))

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_constant(self) -> bool:
        return _is_const(self.num) and _is_const(self.den)

    @property
    def is_polynomial(self) -> bool:
        return _is_const(self.den)

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return _const_of(self.num)

    def numerator(self) -> "Expr":
        return Expr(self.num, _reduced=True)

    def denominator(self) -> "Expr":
        return Expr(self.den, _reduced=True)

    def monic(self) -> "Expr":
        """Numerator scaled to leading coefficient 1 (used to normalize loci)."""
        if not self.num:
            return self
        return Expr(_pscale(self.num, 1 / _lead_coeff(self.num)), _reduced=True)

    def is_polynomial_in(self, v: str) -> bool:
        return v not in _pvars(self.den)

    def degree(self, v: str) -> int:
        if not self.is_polynomial_in(v):
            raise NonPolynomialError(f"{self} is not polynomial in {v}")
        return max((dict(m).get(v, 0) for m in self.num), default=0)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            return self
        if not self.num:
            return o
        if _is_const(self.den) and _is_const(o.den):
            return Expr(_padd(self.num, o.num), _reduced=True)
        if _is_const(self.den):
            # gcd(a*d + c, d) = gcd(c, d) = 1
            return Expr(_padd(_pmul(self.num, o.den), o.num), o.den, _reduced=True)
        if _is_const(o.den):
            return Expr(_padd(self.num, _pmul(o.num, self.den)), self.den, _reduced=True)
        if self.den == o.den:
            return Expr(_padd(self.num, o.num), self.den)
        return Expr(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)), _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return Expr(_pneg(self.num), self.den, _reduced=True)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not self.num or not o.num:
            return ZERO
        if _is_const(self.den) and _is_const(o.den):
            return Expr(_pmul(self.num, o.num), _reduced=True)
        if self.is_constant:
            return Expr(_pscale(o.num, _const_of(self.num)), o.den, _reduced=True)
        if o.is_constant:
            return Expr(_pscale(self.num, _const_of(o.num)), self.den, _reduced=True)
        return Expr(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            raise PoleError("division by the zero expression")
        if o.is_constant:
            return Expr(_pscale(self.num, 1 / _const_of(o.num)), self.den, _reduced=True)
        return Expr(_pmul(self.num, o.den), _pmul(self.den, o.num))

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ONE / (self ** -n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    # -- calculus -----------------------------------------------------------
    def diff(self, v: str) -> "Expr":
        return diff(self, v)

    def subs(self, bindings: Mapping[str, object]) -> "Expr":
        return substitute(self, bindings)

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        return evaluate(self, point)

    # -- printing -----------------------------------------------------------
    def __str__(self):
        if _is_const(self.den):
            return _poly_str(self.num)
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})"

    def __repr__(self):
        return f"Expr({str(self)!r})"


def _reduce(num: Poly, den: Poly) -> tuple:
    if not num:
        return {}, {(): Fraction(1)}
    if _is_const(den):
        c = _const_of(den)
        return (_pscale(num, 1 / c) if c != 1 else num), {(): Fraction(1)}
    if not _is_const(num):
        _, num, den = _cofactors(num, den)
    lc = _lead_coeff(den)
    if lc != 1:
        num = _pscale(num, 1 / lc)
        den = _pscale(den, 1 / lc)
    if _is_const(den):
        return num, {(): Fraction(1)}
    return num, den


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, Rational)) and not isinstance(x, bool):
        return Expr.const(x)
    return NotImplemented


def as_expr(x) -> Expr:
    """Coerce numbers and grammar strings to :class:`Expr`."""
    if isinstance(x, str):
        return parse(x)
    e = _coerce(x)
    if e is NotImplemented:
        raise TypeError(f"cannot convert {x!r} to Expr")
    return e


ZERO = Expr({}, _reduced=True)
ONE = Expr.const(1)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"(\d+)|([a-zA-Z][a-zA-Z0-9_]*)|([-+*/^()])")


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        if m.group(1):
            toks.append(("int", m.group(1), pos))
        elif m.group(2):
            toks.append(("ident", m.group(2), pos))
        else:
            toks.append((m.group(3), m.group(3), pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str):
        t = self.peek()
        what = "end of input" if t[0] == "end" else repr(t[1])
        raise ParseError(f"{msg}, found {what}", t[2], self.text)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("expected operator")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero:
                    raise ParseError("division by zero", pos, self.text)
                e = e / rhs
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            t = self.peek()
            if t[0] != "int":
                self.fail("expected nonnegative integer exponent")
            self.take()
            return base ** int(t[1])
        return base

    def atom(self) -> Expr:
        t = self.peek()
        if t[0] == "int":
            self.take()
            return Expr.const(int(t[1]))
        if t[0] == "ident":
            self.take()
            return Expr.var(t[1])
        if t[0] == "(":
            self.take()
            e = self.expr()
            if self.peek()[0] != ")":
                self.fail("expected ')'")
            self.take()
            return e
        self.fail("expected number, identifier or '('")


def parse(text: str) -> Expr:
    """Parse the expression grammar into a canonical :class:`Expr`."""
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def arith(lhs, op: str, rhs) -> Expr:
    lhs, rhs = as_expr(lhs), as_expr(rhs)
    if op == "+":
        return lhs + rhs
    if op in ("-", "−"):
        return lhs - rhs
    if op in ("*", "×"):
        return lhs * rhs
    if op in ("/", "÷"):
        return lhs / rhs
    raise ValueError(f"unknown operator {op!r}")


def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative."""
    dn = _pdiff(e.num, v)
    if _is_const(e.den):
        return Expr(dn, e.den, _reduced=True) if dn else ZERO
    dd = _pdiff(e.den, v)
    if not dd:
        return Expr(dn, e.den) if dn else ZERO
    num = _padd(_pmul(dn, e.den), _pneg(_pmul(e.num, dd)))
    return Expr(num, _pmul(e.den, e.den))


def antiderive_poly(e: Expr, v: str) -> Expr:
    """Antiderivative in ``v`` with zero constant term; ``e`` must be polynomial in ``v``."""
    if not e.is_polynomial_in(v):
        raise NonPolynomialError(f"{e} is not polynomial in {v}")
    return Expr(_pint(e.num, v), e.den)


def substitute(e: Expr, bindings: Mapping[str, object]) -> Expr:
    """Simultaneous substitution of variables by expressions."""
    vals = {k: as_expr(v) for k, v in bindings.items()}
    if not (e.variables & vals.keys()):
        return e

    def ev(p: Poly) -> Expr:
        total = ZERO
        powers: dict = {}
        for m, c in p.items():
            term = Expr.const(c)
            for n, k in m:
                if n in vals:
                    key = (n, k)
                    if key not in powers:
                        powers[key] = vals[n] ** k
                    term = term * powers[key]
                else:
                    term = term * Expr({((n, k),): Fraction(1)}, _reduced=True)
            total = total + term
        return total

    num = ev(e.num)
    den = ev(e.den) if not _is_const(e.den) else ONE
    if den.is_zero:
        raise PoleError(f"substitution makes the denominator of {e} vanish")
    return num / den


def _eval_poly(p: Poly, point: Mapping[str, Fraction]) -> Fraction:
    total = Fraction(0)
    for m, c in p.items():
        term = c
        for n, k in m:
            try:
                term *= point[n] ** k
            except KeyError:
                raise UnboundVariableError(n) from None
        total += term
    return total


def evaluate(e: Expr, point: Mapping[str, Number]) -> Fraction:
    """Exact value of ``e`` at a rational point."""
    pt = {k: Fraction(v) for k, v in point.items()}
    den = _eval_poly(e.den, pt)
    num = _eval_poly(e.num, pt)
    if den == 0:
        raise PoleError(f"denominator of {e} vanishes at the point")
    return num / den


def poly_gcd(exprs: Iterable[Expr]) -> Expr:
    """Monic gcd of polynomial expressions (zero entries are skipped)."""
    g: Poly | None = None
    for e in exprs:
        if not e.is_polynomial:
            raise NonPolynomialError(f"{e} is not a polynomial")
        if e.is_zero:
            continue
        g = e.num if g is None else _cofactors(g, e.num)[0]
    if g is None:
        return ZERO
    lc = _lead_coeff(g)
    return Expr(_pscale(g, 1 / lc), _reduced=True)


def poly_quotient(a: Expr, b: Expr) -> Expr | None:
    """``a / b`` if it is a polynomial, else ``None``."""
    q = a / b
    return q if q.is_polynomial else None


def sign_at(e: Expr, point: Mapping[str, Number]) -> int:
    v = evaluate(e, point)
    return (v > 0) - (v < 0)
