"""Gaussian elimination over the rationals or the field of rational functions.

Entries are either :class:`fractions.Fraction` or :class:`~eds.symcore.Expr`;
the algorithms only use field operations, truthiness as the zero test, and
an ``is_constant`` probe to prefer constant pivots.  Whenever a pivot is a
nonconstant function its numerator is recorded, since the computed rank may
drop on the zero set of that polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .symcore import Expr, evaluate


def _is_const(x) -> bool:
    return not isinstance(x, Expr) or x.is_constant


@dataclass
class Elimination:
    """Reduced row echelon form.

    ``rows[i]`` has a 1 in column ``pivots[i]`` and zeros in every other pivot
    column.  ``loci`` lists numerators of the nonconstant pivots used.
    """

    rows: list
    pivots: list
    ncols: int
    loci: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def free_columns(self, order: Sequence[int] | None = None) -> list:
        cols = range(self.ncols) if order is None else order
        return [c for c in cols if c not in self.pivots]


def row_reduce(rows: Sequence[Sequence], ncols: int | None = None,
               order: Sequence[int] | None = None) -> Elimination:
    """Full row reduction; pivots are only taken from columns in ``order``.

    Within ``order``, the first column holding a nonzero constant entry is
    preferred; failing that, the first column with any nonzero entry.
    """
    work = [list(r) for r in rows]
    if ncols is None:
        ncols = len(work[0]) if work else 0
    cols = list(range(ncols)) if order is None else list(order)
    pivots: list = []
    loci: list = []
    remaining = list(range(len(work)))
    out_rows: list = []
    while remaining and cols:
        choice = None
        for c in cols:
            for i in remaining:
                v = work[i][c]
                if v and _is_const(v):
                    choice = (i, c)
                    break
            if choice:
                break
        if choice is None:
            for c in cols:
                for i in remaining:
                    if work[i][c]:
                        choice = (i, c)
                        break
                if choice:
                    break
        if choice is None:
            break
        i, c = choice
        pv = work[i][c]
        if not _is_const(pv):
            loci.append(pv.monic())
        prow = [v / pv if v else v for v in work[i]]
        remaining.remove(i)
        for j in remaining:
            f = work[j][c]
            if f:
                work[j] = [a - f * b if b else a for a, b in zip(work[j], prow)]
        for k, r in enumerate(out_rows):
            f = r[c]
            if f:
                out_rows[k] = [a - f * b if b else a for a, b in zip(r, prow)]
        out_rows.append(prow)
        pivots.append(c)
        cols.remove(c)
    return Elimination(out_rows, pivots, ncols, loci)


def nullspace(rows: Sequence[Sequence], ncols: int, order: Sequence[int] | None = None,
              zero=None, one=None) -> tuple:
    """Basis of ``{v : rows @ v = 0}`` and the pivot loci used to find it.

    Basis vectors have a 1 in one free column and zeros in the other free
    columns.  Free columns are listed in ``order`` (default natural order).
    """
    el = row_reduce(rows, ncols, order)
    if zero is None:
        zero, one = _field_units(rows)
    basis = []
    for f in el.free_columns(order):
        v = [zero] * ncols
        v[f] = one
        for r, p in zip(el.rows, el.pivots):
            if r[f]:
                v[p] = -r[f]
        basis.append(v)
    return basis, el.loci


def _field_units(rows):
    for r in rows:
        for v in r:
            if isinstance(v, Expr):
                return Expr.const(0), Expr.const(1)
    return Fraction(0), Fraction(1)


class SpanReducer:
    """Incrementally maintained reduced echelon basis of a row space."""

    def __init__(self, ncols: int, rows: Sequence[Sequence] = ()):
        self.ncols = ncols
        self.rows: list = []
        self.pivots: list = []
        self.loci: list = []
        for r in rows:
            self.add(r)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def residual(self, v: Sequence) -> list:
        v = list(v)
        for r, p in zip(self.rows, self.pivots):
            f = v[p]
            if f:
                v = [a - f * b if b else a for a, b in zip(v, r)]
        return v

    def contains(self, v: Sequence) -> bool:
        return self.rank == self.ncols or not any(self.residual(v))

    def add(self, v: Sequence) -> bool:
        """Insert ``v``; returns False if it was already in the span."""
        if self.rank == self.ncols:
            return False
        v = self.residual(v)
        nz = [c for c in range(self.ncols) if v[c]]
        if not nz:
            return False
        c = next((c for c in nz if _is_const(v[c])), nz[0])
        pv = v[c]
        if not _is_const(pv):
            self.loci.append(pv.monic())
        row = [a / pv if a else a for a in v]
        for k, r in enumerate(self.rows):
            f = r[c]
            if f:
                self.rows[k] = [a - f * b if b else a for a, b in zip(r, row)]
        self.rows.append(row)
        self.pivots.append(c)
        return True


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    return row_reduce(rows, ncols).rank


def solve(A: Sequence[Sequence], b: Sequence):
    """Particular solution of ``A x = b`` (free variables set to 0), or ``None``."""
    n = len(A[0]) if A else 0
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    el = row_reduce(aug, n + 1, order=range(n))
    zero, _ = _field_units(aug)
    x = [zero] * n
    for r, p in zip(el.rows, el.pivots):
        x[p] = r[n]
    for r, bi in zip(A, b):
        if sum((a * xi for a, xi in zip(r, x) if a and xi), start=zero) != bi:
            return None
    return x


def inverse(M: Sequence[Sequence]):
    n = len(M)
    zero, one = _field_units(M)
    aug = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(M)]
    el = row_reduce(aug, 2 * n, order=range(n))
    if el.rank < n:
        raise ZeroDivisionError("singular matrix")
    inv = [None] * n
    for r, p in zip(el.rows, el.pivots):
        inv[p] = r[n:]
    return inv


def evaluate_matrix(M: Sequence[Sequence], point: Mapping) -> list:
    return [[evaluate(v, point) if isinstance(v, Expr) else Fraction(v) for v in r] for r in M]


def matmul(A, B):
    return [[sum((a * b for a, b in zip(r, col)), start=0 * r[0]) for col in zip(*B)] for r in A]
