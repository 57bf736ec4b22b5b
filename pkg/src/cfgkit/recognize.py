"""Membership tests for the lattice classes generated by chip-firing games,
with witness-game synthesis.

Three models are supported: general directed games (``cfg``), sandpile games
with symmetric edges between non-sink vertices (``asm``), and games on an
acyclic support graph (``acfg``).  Witness vertices are named after the
meet-irreducible they fire for, plus the reserved sink ``__sink``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .engine import MultiGraph
from .feasibility import (
    E,
    IneqSystem,
    Solution,
    W,
    build_E,
    build_E_prime,
    build_Omega,
    integerize,
    solve_nonneg,
)
from .lattice import SINK, InternalError, IrreducibleContext, Lattice, UldCertificate

MODELS = ("cfg", "asm", "acfg")


@dataclass(frozen=True)
class GameWitness:
    graph: MultiGraph
    initial: dict[str, int]
    model: str
    solutions: dict[str, Solution] = field(default_factory=dict)


@dataclass(frozen=True)
class Rejection:
    """Why a lattice is outside a class: the infeasible subsystem or a cycle."""

    reason: str
    subsystem: str = ""
    cycle: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.cycle:
            return f"{self.reason}: {' -> '.join(self.cycle)}"
        if self.subsystem:
            name = self.subsystem if self.subsystem == "Omega" else f"E({self.subsystem})"
            return f"{name} infeasible"
        return self.reason


@dataclass(frozen=True)
class Recognition:
    model: str
    witness: GameWitness | None = None
    rejection: Rejection | None = None

    @property
    def accepted(self) -> bool:
        return self.witness is not None

    def __bool__(self) -> bool:
        return self.accepted


def _solve_integral(system: IneqSystem, fallback: bool = False) -> Solution | None:
    rational = solve_nonneg(build_E_prime(system))
    if rational is None:
        return None
    return integerize(rational, system, fallback=fallback)


def solve_all(ctx: IrreducibleContext) -> tuple[dict[str, Solution], str | None]:
    """Integer solutions of every per-m system; stops at the first infeasible m."""
    sols = {}
    for m in ctx.M:
        sol = _solve_integral(build_E(ctx, m))
        if sol is None:
            return sols, m
        sols[m] = sol
    return sols, None


def _empty_witness(model: str) -> GameWitness:
    return GameWitness(MultiGraph({}, [SINK]), {SINK: 0}, model)


def _directed_game(ctx: IrreducibleContext, sols: dict[str, Solution], model: str) -> GameWitness:
    mult: dict[tuple[str, str], int] = {}
    need: dict[str, int] = {}
    for m in ctx.M:
        sol = sols[m]
        w = int(sol[W(m)])
        need[m] = w
        received = 0
        for v, q in sol.assignment.items():
            if v.kind == "e" and q:
                mult[v.x, m] = int(q)
                received += int(q)
        mult[m, SINK] = w + received
    g = MultiGraph(mult, list(ctx.M) + [SINK])
    initial = {}
    for v in g.vertices:
        if v == SINK:
            initial[v] = 0
        elif g.in_degree(v) == 0:
            initial[v] = g.out_degree(v)
        else:
            initial[v] = g.out_degree(v) - need[v]
        if initial[v] < 0:
            raise InternalError(f"negative initial chips at {v}")
    return GameWitness(g, initial, model, dict(sols))


def recognize_cfg(lat: Lattice, cert: UldCertificate, ctx: IrreducibleContext) -> Recognition:
    if not ctx.M:
        return Recognition("cfg", _empty_witness("cfg"))
    sols, bad = solve_all(ctx)
    if bad is not None:
        return Recognition("cfg", rejection=Rejection("system infeasible", bad))
    return Recognition("cfg", _directed_game(ctx, sols, "cfg"))


def symmetric_game(sol: Solution, initial_vertices) -> tuple[MultiGraph, dict[str, int]]:
    """Sandpile game from an integer solution of the joint system.

    Both directions of a pair get the shared value of ``e[a->b]``; each
    vertex sends ``w`` plus what it receives to the sink and starts one
    firing short of its out-degree (full out-degree for ``initial_vertices``).
    """
    M = sorted(v.m for v in sol.assignment if v.kind == "w")
    mult: dict[tuple[str, str], int] = {}
    for v, q in sol.assignment.items():
        if v.kind != "e":
            continue
        k = int(q)
        for a, b in ((v.x, v.m), (v.m, v.x)):
            if mult.get((a, b), k) != k:
                raise InternalError(f"asymmetric edge {a}-{b}")
            if k:
                mult[a, b] = k
    for m in M:
        received = sum(k for (a, b), k in mult.items() if b == m)
        mult[m, SINK] = int(sol[W(m)]) + received
    g = MultiGraph(mult, M + [SINK])
    initial = {SINK: 0}
    starters = set(initial_vertices)
    for m in M:
        initial[m] = g.out_degree(m) - (0 if m in starters else int(sol[W(m)]))
        if initial[m] < 0:
            raise InternalError(f"negative initial chips at {m}")
    return g, dict(sorted(initial.items()))


def recognize_asm(lat: Lattice, cert: UldCertificate, ctx: IrreducibleContext) -> Recognition:
    if not ctx.M:
        return Recognition("asm", _empty_witness("asm"))
    omega = build_Omega(ctx)
    sol = _solve_integral(omega, fallback=True)
    if sol is None:
        return Recognition("asm", rejection=Rejection("system infeasible", "Omega"))
    g, initial = symmetric_game(sol, [m for m in ctx.M if ctx.is_initial(m)])
    sols = {m: Solution({v: q for v, q in sol.assignment.items() if v.m == m}) for m in ctx.M}
    return Recognition("asm", GameWitness(g, initial, "asm", sols))


@dataclass(frozen=True)
class ScriptG:
    """Digraph on M with an edge x -> m when e[x->m] occurs in one of the U rows of m."""

    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def find_cycle(self) -> tuple[str, ...] | None:
        succ = {v: sorted(b for a, b in self.edges if a == v) for v in self.vertices}
        color = {v: 0 for v in self.vertices}
        path: list[str] = []

        def visit(v):
            color[v] = 1
            path.append(v)
            for w in succ[v]:
                if color[w] == 1:
                    return tuple(path[path.index(w):]) + (w,)
                if color[w] == 0:
                    found = visit(w)
                    if found:
                        return found
            color[v] = 2
            path.pop()
            return None

        for v in self.vertices:
            if color[v] == 0:
                found = visit(v)
                if found:
                    return found
        return None

    def is_acyclic(self) -> bool:
        # Kahn's topological sort
        indeg = {v: 0 for v in self.vertices}
        for _, b in self.edges:
            indeg[b] += 1
        ready = [v for v, d in indeg.items() if d == 0]
        seen = 0
        while ready:
            v = ready.pop()
            seen += 1
            for a, b in self.edges:
                if a == v:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        ready.append(b)
        return seen == len(self.vertices)


def build_script_g(ctx: IrreducibleContext) -> ScriptG:
    edges = set()
    for m in ctx.M:
        for x in ctx.u_vars(m):
            if x == m:
                raise InternalError(f"self-edge at {m}")
            edges.add((x, m))
    return ScriptG(tuple(ctx.M), frozenset(edges))


def is_acyclic(sg: ScriptG) -> bool:
    return sg.is_acyclic()


def recognize_acfg(lat: Lattice, cert: UldCertificate, ctx: IrreducibleContext) -> Recognition:
    if not ctx.M:
        return Recognition("acfg", _empty_witness("acfg"))
    sols, bad = solve_all(ctx)
    if bad is not None:
        return Recognition("acfg", rejection=Rejection("system infeasible", bad))
    sg = build_script_g(ctx)
    if not sg.is_acyclic():
        return Recognition("acfg", rejection=Rejection("script-G cycle", cycle=sg.find_cycle()))
    trimmed = {}
    for m, sol in sols.items():
        keep = ctx.u_vars(m)
        vals = {v: (q if v.kind == "w" or v.x in keep else Fraction(0)) for v, q in sol.assignment.items()}
        if not ctx.is_initial(m):
            vals[W(m)] = min(sum((vals[E(x, m)] for x in ctx.below[a]), Fraction(0)) for a in ctx.U[m])
        trimmed[m] = Solution(vals)
        bad_rows = build_E(ctx, m).check(vals)
        if bad_rows:
            raise InternalError(f"trimmed solution for {m} violates {bad_rows[0]}")
    wit = _directed_game(ctx, trimmed, "acfg")
    if not wit.graph.is_acyclic():
        raise InternalError("acyclic construction produced a cycle")
    return Recognition("acfg", wit)


def recognize(lat: Lattice, model: str, cert: UldCertificate | None = None, ctx: IrreducibleContext | None = None) -> Recognition:
    from .lattice import check_uld, compute_context

    cert = cert or check_uld(lat)
    ctx = ctx or compute_context(lat, cert)
    fn = {"cfg": recognize_cfg, "asm": recognize_asm, "acfg": recognize_acfg}[model]
    return fn(lat, cert, ctx)


def simple_only_sufficient(lat: Lattice, cert: UldCertificate) -> bool:
    """True when every pair of meet-irreducibles labels two covers out of one element.

    That makes the graph H on M complete, which is enough for every
    generating game to be simple.  It says nothing when H is not complete.
    """
    edges = set()
    for x in lat.elements:
        labels = sorted({cert.label[x, y] for y in lat.upper_covers(x)})
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                edges.add((a, b))
    n = len(lat.M)
    return len(edges) == n * (n - 1) // 2
