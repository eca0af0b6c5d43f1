"""Exact rational feasibility for ``A x = b, x >= 0``.

Phase-one simplex on a dense Fraction tableau with Bland's rule, so it always
terminates and never rounds. An infeasible system comes back with a Farkas
vector ``y`` (``y @ A <= 0`` columnwise and ``y @ b > 0``) read off the
reduced costs of the artificial columns.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    x: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None
    pivots: int = 0


def solve_feasibility(A: Sequence[Sequence], b: Sequence) -> Feasibility:
    m = len(A)
    n = len(A[0]) if m else 0
    signs = [(-1 if Fraction(bi) < 0 else 1) for bi in b]
    width = n + m + 1
    rhs = n + m
    tab = []
    for i in range(m):
        s = signs[i]
        row = [Fraction(s * a) for a in A[i]] + [Fraction(0)] * m + [Fraction(s * Fraction(b[i]))]
        row[n + i] = Fraction(1)
        tab.append(row)
    # reduced costs of phase one: minimise the sum of artificials
    cost = [Fraction(0)] * width
    for row in tab:
        for j in range(n):
            if row[j]:
                cost[j] -= row[j]
        cost[rhs] -= row[rhs]
    basis = [n + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(n + m) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][rhs] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # cannot happen in phase one: the objective is bounded below by 0
            raise ArithmeticError("unbounded phase-one problem")
        _pivot(tab, cost, leave, enter)
        basis[leave] = enter
        pivots += 1

    if cost[rhs] != 0:
        y = tuple(signs[i] * (1 - cost[n + i]) for i in range(m))
        return Feasibility(False, farkas=y, pivots=pivots)
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][rhs]
    return Feasibility(True, x=tuple(x), pivots=pivots)


def _pivot(tab, cost, r, c):
    prow = tab[r]
    piv = prow[c]
    if piv != 1:
        for j, v in enumerate(prow):
            if v:
                prow[j] = v / piv
    nz = [(j, v) for j, v in enumerate(prow) if v]
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[c]
        if f:
            for j, v in nz:
                row[j] -= f * v
    f = cost[c]
    if f:
        for j, v in nz:
            cost[j] -= f * v
