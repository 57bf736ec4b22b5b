"""Exact phase-one simplex over the rationals.

Only feasibility of ``A x (rel) b, x >= 0`` is decided; there is no objective
beyond the sum of artificial variables.  Bland's rule keeps the pivot
sequence finite and deterministic.
"""
from __future__ import annotations

from fractions import Fraction

LE, LT, GE, EQ = "<=", "<", ">=", "="


def find_feasible(rows, n_vars):
    """Return a nonnegative rational point satisfying every row, or None.

    ``rows`` is a sequence of ``(coeffs, rel, rhs)`` where ``coeffs`` is a
    length-``n_vars`` sequence and ``rel`` is one of ``<=``, ``>=``, ``=``.
    """
    n_rows = len(rows)
    if n_rows == 0:
        return [Fraction(0)] * n_vars

    # column layout: originals | slacks | artificials
    n_slack = sum(1 for _, rel, _ in rows if rel != EQ)
    tab: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    artificial_rows = []
    slack_col = n_vars
    for r, (coeffs, rel, b) in enumerate(rows):
        if rel not in (LE, GE, EQ):
            raise ValueError(f"unsupported relation {rel!r}")
        row = [Fraction(c) for c in coeffs] + [Fraction(0)] * n_slack
        slack = None
        if rel != EQ:
            slack = slack_col
            row[slack] = Fraction(1 if rel == LE else -1)
            slack_col += 1
        b = Fraction(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
        tab.append(row)
        rhs.append(b)
        if slack is not None and row[slack] == 1:
            basis.append(slack)
        else:
            basis.append(-1)
            artificial_rows.append(r)

    n_art = len(artificial_rows)
    width = n_vars + n_slack + n_art
    for row in tab:
        row.extend([Fraction(0)] * n_art)
    for k, r in enumerate(artificial_rows):
        col = n_vars + n_slack + k
        tab[r][col] = Fraction(1)
        basis[r] = col
    if n_art == 0:
        return _read_point(basis, rhs, n_vars)

    art_start = n_vars + n_slack
    # reduced costs of  min sum(artificials)
    cost = [Fraction(0)] * width
    for r in artificial_rows:
        for j in range(art_start):
            cost[j] -= tab[r][j]

    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for r in range(n_rows):
            a = tab[r][enter]
            if a > 0:
                ratio = rhs[r] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave is None:
            # phase one is bounded below by zero, so this cannot happen
            raise ArithmeticError("unbounded phase-one problem")
        _pivot(tab, rhs, cost, leave, enter)
        basis[leave] = enter

    if any(rhs[r] != 0 for r in range(n_rows) if basis[r] >= art_start):
        return None
    return _read_point(basis, rhs, n_vars)


def _pivot(tab, rhs, cost, r, c):
    prow = tab[r]
    p = prow[c]
    if p != 1:
        prow[:] = [v / p for v in prow]
        rhs[r] /= p
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[c]
        if f:
            row[:] = [a - f * b for a, b in zip(row, prow)]
            rhs[i] -= f * rhs[r]
    f = cost[c]
    if f:
        cost[:] = [a - f * b for a, b in zip(cost, prow)]


def _read_point(basis, rhs, n_vars):
    x = [Fraction(0)] * n_vars
    for r, col in enumerate(basis):
        if col < n_vars:
            x[col] = rhs[r]
    return x
