"""Exact-arithmetic linear programming over rationals.

Dense two-phase tableau simplex with Bland's anti-cycling rule.  Problem
sizes here are tiny (tens of variables), so clarity and determinism beat
speed: identical inputs always pivot identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class LPError(ValueError):
    pass


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction]
    value: Fraction | None


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    inv = ONE / piv
    tab[row] = [v * inv for v in tab[row]]
    prow = tab[row]
    for i, r in enumerate(tab):
        if i == row:
            continue
        factor = r[col]
        if factor != 0:
            tab[i] = [a - factor * b for a, b in zip(r, prow)]
    basis[row] = col


def _run_simplex(tab, basis, ncols):
    """Maximize the objective held in the last tableau row (Bland's rule)."""
    obj = len(tab) - 1
    while True:
        enter = -1
        for j in range(ncols):
            if tab[obj][j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(obj):
            coeff = tab[i][enter]
            if coeff > 0:
                ratio = tab[i][-1] / coeff
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(tab, basis, leave, enter)


def solve_lp(
    objective: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    a_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
    maximize: bool = True,
) -> LPResult:
    """Solve max/min c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0."""
    n = len(objective)
    c = [Fraction(v) for v in objective]
    if not maximize:
        c = [-v for v in c]

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for row, b in zip(a_ub, b_ub):
        r = [Fraction(v) for v in row]
        b = Fraction(b)
        if b < 0:
            rows.append([-v for v in r])
            rhs.append(-b)
            kinds.append("ge")
        else:
            rows.append(r)
            rhs.append(b)
            kinds.append("le")
    for row, b in zip(a_eq, b_eq):
        r = [Fraction(v) for v in row]
        b = Fraction(b)
        if b < 0:
            r = [-v for v in r]
            b = -b
        rows.append(r)
        rhs.append(b)
        kinds.append("eq")

    m = len(rows)
    n_slack = sum(1 for k in kinds if k == "le")
    n_surplus = sum(1 for k in kinds if k == "ge")
    n_art = sum(1 for k in kinds if k in ("ge", "eq"))
    width = n + n_slack + n_surplus + n_art

    tab: list[list[Fraction]] = []
    basis: list[int] = []
    si = n
    ui = n + n_slack
    ai = n + n_slack + n_surplus
    art_cols: list[int] = []
    for i in range(m):
        row = rows[i] + [ZERO] * (width - n) + [rhs[i]]
        if kinds[i] == "le":
            row[si] = ONE
            basis.append(si)
            si += 1
        elif kinds[i] == "ge":
            row[ui] = -ONE
            row[ai] = ONE
            basis.append(ai)
            art_cols.append(ai)
            ui += 1
            ai += 1
        else:
            row[ai] = ONE
            basis.append(ai)
            art_cols.append(ai)
            ai += 1
        tab.append(row)

    if art_cols:
        # phase 1: drive artificial variables to zero
        obj = [ZERO] * (width + 1)
        for col in art_cols:
            obj[col] = ONE
        tab.append(obj)
        for i, b in enumerate(basis):
            if b in art_cols:
                tab[-1] = [a - t for a, t in zip(tab[-1], tab[i])]
        status = _run_simplex(tab, basis, width)
        if status != "optimal" or tab[-1][-1] != 0:
            return LPResult("infeasible", [], None)
        tab.pop()
        # pivot any artificial still in the basis out on a structural column
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                for j in range(n + n_slack + n_surplus):
                    if tab[i][j] != 0:
                        _pivot(tab, basis, i, j)
                        break
        for row in tab:
            for col in art_cols:
                row[col] = ZERO

    obj = [-v for v in c] + [ZERO] * (width - n) + [ZERO]
    tab.append(obj)
    for i, b in enumerate(basis):
        if b < n and c[b] != 0:
            tab[-1] = [a + c[b] * t for a, t in zip(tab[-1], tab[i])]
    status = _run_simplex(tab, basis, n + n_slack + n_surplus)
    if status == "unbounded":
        return LPResult("unbounded", [], None)

    x = [ZERO] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = tab[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
    if not maximize:
        value = -value
    return LPResult("optimal", x, value)
