"""Per-meet-irreducible inequality systems and their exact nonnegative solution.

For a meet-irreducible ``m`` the system over the variables ``w[m]`` and
``e[x->m]`` says how many chips ``m`` needs (``w``) and how many it receives
from each earlier firing ``x``: it must be able to fire at every minimal
element of U_m and must be unable to fire at every maximal element of L_m.
The joint system for sandpile (symmetric) games adds ``e[a->b] = e[b->a]``.

Dump format, one constraint per line::

    w[c6] <= e[c8->c6]
    e[c9->c6] < w[c6]
    e[c6->c7] = e[c7->c6]
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import InternalError, IrreducibleContext
from .simplex import EQ, GE, LE, LT, find_feasible

RELATIONS = (LE, LT, GE, EQ)


@dataclass(frozen=True)
class VarId:
    """``W(m)`` (kind ``"w"``) or ``E(x, m)`` (kind ``"e"``, chips sent from x to m)."""

    m: str
    kind: str
    x: str = ""

    def __post_init__(self):
        if self.kind not in ("w", "e"):
            raise ValueError(f"bad variable kind {self.kind!r}")
        if self.kind == "e" and self.x == self.m:
            raise ValueError(f"e[{self.x}->{self.m}] would be a loop")
        if self.kind == "w" and self.x:
            raise ValueError("w variables carry no source")

    def sort_key(self):
        return (self.m, 0 if self.kind == "w" else 1, self.x)

    def __str__(self) -> str:
        return f"w[{self.m}]" if self.kind == "w" else f"e[{self.x}->{self.m}]"


def W(m: str) -> VarId:
    return VarId(m, "w")


def E(x: str, m: str) -> VarId:
    return VarId(m, "e", x)


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coef * var) rel rhs`` with integer data.

    ``kind`` records where the row came from: ``"U"`` / ``"L"`` with the
    anchoring lattice element, ``"unit"`` for ``w >= 1`` and ``"sym"`` for the
    symmetry equalities.  It is metadata only.
    """

    lhs: tuple[tuple[VarId, int], ...]
    rel: str
    rhs: int = 0
    kind: str = ""
    anchor: str = ""

    def __post_init__(self):
        if not self.lhs:
            raise ValueError("empty left-hand side")
        if self.rel not in RELATIONS:
            raise ValueError(f"bad relation {self.rel!r}")

    @classmethod
    def make(cls, coeffs: dict[VarId, int], rel: str, rhs: int = 0, kind: str = "", anchor: str = ""):
        items = tuple(sorted(((v, int(c)) for v, c in coeffs.items() if c), key=lambda t: t[0].sort_key()))
        return cls(items, rel, int(rhs), kind, anchor)

    @property
    def coeffs(self) -> dict[VarId, int]:
        return dict(self.lhs)

    def holds(self, assignment) -> bool:
        total = sum(Fraction(c) * assignment[v] for v, c in self.lhs)
        return {
            LE: total <= self.rhs,
            LT: total < self.rhs,
            GE: total >= self.rhs,
            EQ: total == self.rhs,
        }[self.rel]

    def normal_form(self):
        """Canonical key: equalities up to sign, inequalities oriented as <= / <."""
        coeffs, rhs, rel = dict(self.lhs), self.rhs, self.rel
        if rel == GE:
            coeffs, rhs, rel = {v: -c for v, c in coeffs.items()}, -rhs, LE
        if rel == EQ:
            first = min(coeffs, key=VarId.sort_key)
            if coeffs[first] < 0:
                coeffs, rhs = {v: -c for v, c in coeffs.items()}, -rhs
        return (tuple(sorted(((v.sort_key(), c) for v, c in coeffs.items()))), rel, rhs)

    def __str__(self) -> str:
        return render_constraint(self)


def _side(terms) -> str:
    out = []
    for v, c in terms:
        if isinstance(v, VarId):
            s = str(v) if c == 1 else f"{c}*{v}"
        else:
            s = str(c)
        out.append(s)
    return " + ".join(out) if out else "0"


def render_constraint(c: LinearConstraint) -> str:
    left = [(v, k) for v, k in c.lhs if k > 0]
    right = [(v, -k) for v, k in c.lhs if k < 0]
    if c.rhs > 0:
        right.append((None, c.rhs))
    elif c.rhs < 0:
        left.append((None, -c.rhs))
    return f"{_side(left)} {c.rel} {_side(right)}"


@dataclass(frozen=True)
class IneqSystem:
    variables: tuple[VarId, ...]
    constraints: tuple[LinearConstraint, ...]
    name: str = ""

    def __post_init__(self):
        known = set(self.variables)
        for c in self.constraints:
            for v, _ in c.lhs:
                if v not in known:
                    raise ValueError(f"variable {v} not registered in system {self.name!r}")

    @property
    def has_strict(self) -> bool:
        return any(c.rel == LT for c in self.constraints)

    def e_variables(self) -> tuple[VarId, ...]:
        return tuple(v for v in self.variables if v.kind == "e")

    def check(self, assignment) -> list[LinearConstraint]:
        """Constraints violated by ``assignment`` (exact arithmetic)."""
        bad = [c for c in self.constraints if not c.holds(assignment)]
        bad.extend(
            LinearConstraint.make({v: 1}, GE, 0, "nonneg") for v in self.variables if assignment[v] < 0
        )
        return bad

    def dump(self) -> str:
        return "".join(render_constraint(c) + "\n" for c in self.constraints)

    def normal_set(self) -> frozenset:
        return frozenset(c.normal_form() for c in self.constraints)


@dataclass(frozen=True)
class Solution:
    assignment: dict[VarId, Fraction] = field(hash=False)

    def __getitem__(self, v: VarId) -> Fraction:
        return self.assignment[v]

    @property
    def is_integral(self) -> bool:
        return all(q.denominator == 1 for q in self.assignment.values())

    def as_dict(self) -> dict[str, str]:
        return {str(v): str(q) for v, q in sorted(self.assignment.items(), key=lambda t: t[0].sort_key())}


def _sum_le(w: VarId, xs, m: str, anchor: str) -> LinearConstraint:
    coeffs = {w: 1}
    for x in xs:
        coeffs[E(x, m)] = -1
    return LinearConstraint.make(coeffs, LE, 0, "U", anchor)


def _sum_lt(w: VarId, xs, m: str, anchor: str) -> LinearConstraint:
    coeffs = {w: -1}
    for x in xs:
        coeffs[E(x, m)] = 1
    return LinearConstraint.make(coeffs, LT, 0, "L", anchor)


def build_E(ctx: IrreducibleContext, m: str) -> IneqSystem:
    if m not in ctx.U:
        raise ValueError(f"{m} is not a meet-irreducible")
    w = W(m)
    if ctx.is_initial(m):
        return IneqSystem((w,), (LinearConstraint.make({w: 1}, GE, 1, "unit"),), name=m)
    xs = ctx.all_vars(m)
    if m in xs:
        raise InternalError(f"variable e[{m}->{m}] in system of {m}")
    rows = [_sum_le(w, sorted(ctx.below[a]), m, a) for a in ctx.U[m]]
    rows += [_sum_lt(w, sorted(ctx.below[a]), m, a) for a in ctx.L[m]]
    variables = (w,) + tuple(E(x, m) for x in sorted(xs))
    return IneqSystem(variables, tuple(rows), name=m)


def build_E_prime(sys: IneqSystem) -> IneqSystem:
    """Replace each strict ``lhs < rhs`` by ``lhs <= rhs - 1``."""
    rows = tuple(
        LinearConstraint(c.lhs, LE, c.rhs - 1, c.kind, c.anchor) if c.rel == LT else c
        for c in sys.constraints
    )
    return IneqSystem(sys.variables, rows, name=sys.name)


def build_Omega(ctx: IrreducibleContext) -> IneqSystem:
    variables: list[VarId] = []
    rows: list[LinearConstraint] = []
    for m in ctx.M:
        s = build_E(ctx, m)
        variables.extend(s.variables)
        rows.extend(s.constraints)
    present = set(variables)
    for v in sorted(present, key=VarId.sort_key):
        if v.kind != "e":
            continue
        twin = E(v.m, v.x)
        if twin in present and v.x < v.m:
            rows.append(LinearConstraint.make({v: 1, twin: -1}, EQ, 0, "sym"))
    return IneqSystem(tuple(variables), tuple(rows), name="Omega")


class StrictConstraintError(ValueError):
    pass


def solve_nonneg(sys: IneqSystem) -> Solution | None:
    """Exact nonnegative rational solution, or None when the system is infeasible."""
    if sys.has_strict:
        raise StrictConstraintError("eliminate strict constraints (build_E_prime) before solving")
    col = {v: i for i, v in enumerate(sys.variables)}
    rows = []
    for c in sys.constraints:
        coeffs = [0] * len(col)
        for v, k in c.lhs:
            coeffs[col[v]] += k
        rows.append((coeffs, c.rel, c.rhs))
    point = find_feasible(rows, len(col))
    if point is None:
        return None
    sol = Solution(dict(zip(sys.variables, point)))
    bad = sys.check(sol.assignment)
    if bad:
        raise InternalError(f"solver returned a point violating {bad[0]}")
    return sol


class IntegerizationError(InternalError):
    pass


def integerize(sol: Solution, sys: IneqSystem, fallback: bool = False) -> Solution:
    """Scale a rational solution of the strict-eliminated system to integers.

    Each ``e`` becomes ``floor(2 N e)`` with N the number of ``e`` variables;
    each ``w`` becomes the smallest of its U-row sums (``ceil(w)`` when it has
    no U rows, i.e. the ``w >= 1`` case).  ``sys`` is the original strict
    system and the result is checked against it.  With ``fallback`` a failed
    check retries by clearing all denominators, which is always exact.
    """
    scale = 2 * len(sys.e_variables())
    out = _scaled(sol, sys, scale)
    if not sys.check(out):
        return Solution(out)
    if fallback:
        lcm = math.lcm(*(q.denominator for q in sol.assignment.values()))
        out = {v: sol[v] * lcm for v in sys.variables}
        if not sys.check(out):
            return Solution(out)
    raise IntegerizationError(f"integerized solution violates {sys.check(out)[0]} in system {sys.name!r}")


def _scaled(sol: Solution, sys: IneqSystem, scale: int) -> dict[VarId, Fraction]:
    out: dict[VarId, Fraction] = {}
    for v in sys.variables:
        if v.kind == "e":
            out[v] = Fraction(math.floor(scale * sol[v]))
    u_rows: dict[VarId, list[LinearConstraint]] = {}
    for c in sys.constraints:
        if c.kind == "U":
            w = next(v for v, k in c.lhs if v.kind == "w")
            u_rows.setdefault(w, []).append(c)
    for v in sys.variables:
        if v.kind != "w":
            continue
        if v in u_rows:
            out[v] = min(sum((out[x] for x, k in c.lhs if x.kind == "e"), Fraction(0)) for c in u_rows[v])
        else:
            out[v] = Fraction(math.ceil(sol[v]))
    return out


_VAR_RE = re.compile(r"^(?:(\d+)\*)?(?:w\[([^\]\s]+)\]|e\[([^\]\s]+?)->([^\]\s]+)\])$")


def _parse_side(text: str, sign: int, coeffs: dict[VarId, int]) -> int:
    const = 0
    text = text.strip()
    if text == "0":
        return 0
    for term in text.split("+"):
        term = term.strip()
        if term.isdigit():
            const += sign * int(term)
            continue
        mt = _VAR_RE.match(term)
        if not mt:
            raise ValueError(f"bad term {term!r}")
        k = int(mt.group(1) or 1)
        v = W(mt.group(2)) if mt.group(2) else E(mt.group(3), mt.group(4))
        coeffs[v] = coeffs.get(v, 0) + sign * k
    return const


def parse_system(text: str, name: str = "") -> IneqSystem:
    """Read the dump format back; variable order is the canonical sort order."""
    rows = []
    variables: set[VarId] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        mt = re.match(r"^(.*?)\s(<=|>=|<|=)\s(.*)$", line)
        if not mt:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
        left, rel, right = mt.groups()
        coeffs: dict[VarId, int] = {}
        const = _parse_side(left, 1, coeffs) + _parse_side(right, -1, coeffs)
        coeffs = {v: k for v, k in coeffs.items() if k}
        kind = ""
        if rel == LT:
            kind = "L"
        elif rel == LE and any(v.kind == "w" and k > 0 for v, k in coeffs.items()) and const == 0:
            kind = "U"
        elif rel == GE and len(coeffs) == 1:
            kind = "unit"
        elif rel == EQ:
            kind = "sym"
        rows.append(LinearConstraint.make(coeffs, rel, -const, kind))
        variables.update(coeffs)
    return IneqSystem(tuple(sorted(variables, key=VarId.sort_key)), tuple(rows), name=name)
