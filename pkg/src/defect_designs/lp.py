"""Dense exact-rational linear programming.

A small two-phase primal simplex over :class:`fractions.Fraction`.  The LPs
in this package (inner labeling maximizations, the covering bound) have at
most a few hundred variables, and their optima must be reproduced exactly -
region corner points are asserted as equalities of rationals, which a float
solver cannot guarantee.  Bland's rule keeps the pivoting cycle-free.

Problems are stated over x >= 0 as::

    minimize    c . x
    subject to  A_ub x <= b_ub
                A_eq x == b_eq

Callers convert >= rows by negation and free variables by splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None
    value: Fraction | None


def _frac_row(row: Sequence) -> list[Fraction]:
    return [Fraction(v) for v in row]


class _Tableau:
    """Simplex tableau with an explicit priced-out objective row."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.m = len(rows)
        self.width = len(rows[0]) if rows else 0
        self.obj: list[Fraction] = []

    def set_objective(self, cost: list[Fraction]) -> None:
        obj = list(cost) + [_ZERO] * (self.width - len(cost))
        for i in range(self.m):
            factor = obj[self.basis[i]]
            if factor != 0:
                prow = self.rows[i]
                obj = [obj[j] - factor * prow[j] for j in range(self.width)]
        self.obj = obj

    def pivot(self, bi: int, col: int) -> None:
        inv = _ONE / self.rows[bi][col]
        self.rows[bi] = [v * inv for v in self.rows[bi]]
        self.rhs[bi] *= inv
        prow = self.rows[bi]
        for r in range(self.m):
            if r == bi:
                continue
            factor = self.rows[r][col]
            if factor != 0:
                row = self.rows[r]
                self.rows[r] = [row[j] - factor * prow[j] for j in range(self.width)]
                self.rhs[r] -= factor * self.rhs[bi]
        factor = self.obj[col]
        if factor != 0:
            self.obj = [self.obj[j] - factor * prow[j] for j in range(self.width)]
        self.basis[bi] = col

    def optimize(self, allowed: int) -> str:
        """Bland's rule over columns [0, allowed). Returns optimal/unbounded."""
        while True:
            entering = -1
            for j in range(allowed):
                if self.obj[j] < 0:
                    entering = j
                    break
            if entering == -1:
                return "optimal"
            leaving = -1
            best = None
            for i in range(self.m):
                a = self.rows[i][entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leaving])
                    ):
                        best = ratio
                        leaving = i
            if leaving == -1:
                return "unbounded"
            self.pivot(leaving, entering)


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    *,
    maximize: bool = False,
) -> LPResult:
    """Solve the LP exactly; returns status, an optimal vertex and the value."""
    cost = _frac_row(c)
    n = len(cost)
    if maximize:
        cost = [-v for v in cost]

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for A, b, kind in ((A_ub, b_ub, "ub"), (A_eq, b_eq, "eq")):
        if A is None:
            continue
        if b is None or len(A) != len(b):
            raise ValueError("constraint matrix and rhs lengths differ")
        for row, bv in zip(A, b):
            r = _frac_row(row)
            if len(r) != n:
                raise ValueError("constraint row length does not match objective")
            rows.append(r)
            rhs.append(Fraction(bv))
            kinds.append(kind)

    m = len(rows)
    num_slack = sum(1 for k in kinds if k == "ub")
    total = n + num_slack

    tab_rows: list[list[Fraction]] = []
    slack_col_of_row: dict[int, int] = {}
    slack_idx = 0
    for i in range(m):
        row = rows[i] + [_ZERO] * num_slack
        if kinds[i] == "ub":
            row[n + slack_idx] = _ONE
            slack_col_of_row[i] = n + slack_idx
            slack_idx += 1
        tab_rows.append(row)
    for i in range(m):
        if rhs[i] < 0:
            tab_rows[i] = [-v for v in tab_rows[i]]
            rhs[i] = -rhs[i]
            # slack coefficient flipped to -1: no longer usable as basic column
            slack_col_of_row.pop(i, None)

    basis = [-1] * m
    art_cols: list[int] = []
    for i in range(m):
        if i in slack_col_of_row:
            basis[i] = slack_col_of_row[i]
    for i in range(m):
        if basis[i] == -1:
            basis[i] = total + len(art_cols)
            art_cols.append(basis[i])
    width = total + len(art_cols)
    for i in range(m):
        tab_rows[i] = tab_rows[i] + [_ZERO] * len(art_cols)
        if basis[i] >= total:
            tab_rows[i][basis[i]] = _ONE

    tab = _Tableau(tab_rows, rhs, basis)

    if art_cols:
        tab.set_objective([_ZERO] * total + [_ONE] * len(art_cols))
        status = tab.optimize(width)
        assert status == "optimal", "phase-1 objective is bounded below by zero"
        if any(tab.rhs[i] != 0 for i in range(m) if tab.basis[i] >= total):
            return LPResult("infeasible", None, None)
        # Pivot surviving zero-level artificials out where a real column exists;
        # rows with none are redundant and their artificial stays at zero.
        for i in range(m):
            if tab.basis[i] >= total:
                for j in range(total):
                    if tab.rows[i][j] != 0:
                        tab.pivot(i, j)
                        break

    tab.set_objective(cost)
    status = tab.optimize(total)
    if status == "unbounded":
        return LPResult("unbounded", None, None)

    x = [_ZERO] * n
    for i in range(m):
        if tab.basis[i] < n:
            x[tab.basis[i]] = tab.rhs[i]
    value = sum(cost[j] * x[j] for j in range(n))
    if maximize:
        value = -value
    return LPResult("optimal", x, value)
