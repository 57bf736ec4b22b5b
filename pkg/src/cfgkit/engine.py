"""Chip-firing games on directed multigraphs.

A vertex is firable when it has an outgoing non-loop edge and holds at least
its full out-degree (loops included); firing sends one chip along every
outgoing edge, so a loop hands a chip straight back.  Configurations and
shot-vectors are plain ``{vertex: count}`` dicts at the API boundary and
tuples in the vertex order of the graph internally.

Text formats::

    # graph: one edge bundle per line, multiplicity K >= 1
    a b 2
    a __sink 1
    # configuration: chips per vertex
    a 3
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field

from .lattice import SINK, CoverDag, InternalError

DEFAULT_CAP = 10**6

Configuration = dict[str, int]
ShotVector = dict[str, int]


class GameError(ValueError):
    pass


class ClosedComponentError(GameError):
    def __init__(self, components):
        self.components = components
        super().__init__(f"closed component(s) present: {[sorted(c) for c in components]}")


class CapExceeded(GameError):
    pass


def default_cap() -> int:
    env = os.environ.get("CFGKIT_CAP")
    return int(env) if env else DEFAULT_CAP


class MultiGraph:
    """Directed multigraph with edge multiplicities ``E(u, v)``."""

    def __init__(self, mult: dict[tuple[str, str], int], vertices=()):
        verts = set(vertices)
        clean = {}
        for (u, v), k in mult.items():
            k = int(k)
            if k < 0:
                raise GameError(f"negative multiplicity on {u}->{v}")
            verts.update((u, v))
            if k:
                clean[u, v] = k
        self.vertices: tuple[str, ...] = tuple(sorted(verts))
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.mult: dict[tuple[str, str], int] = dict(sorted(clean.items()))
        self._out: dict[str, dict[str, int]] = {v: {} for v in self.vertices}
        self._in: dict[str, dict[str, int]] = {v: {} for v in self.vertices}
        for (u, v), k in self.mult.items():
            self._out[u][v] = k
            self._in[v][u] = k

    @classmethod
    def from_edges(cls, edges, vertices=()) -> "MultiGraph":
        mult: dict[tuple[str, str], int] = {}
        for u, v, *k in edges:
            mult[u, v] = mult.get((u, v), 0) + (k[0] if k else 1)
        return cls(mult, vertices)

    def __repr__(self) -> str:
        return f"MultiGraph({len(self.vertices)} vertices, {sum(self.mult.values())} edges)"

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiGraph) and self.vertices == other.vertices and self.mult == other.mult

    def E(self, u: str, v: str) -> int:
        return self.mult.get((u, v), 0)

    def out_degree(self, v: str) -> int:
        return sum(self._out[v].values())

    def in_degree(self, v: str) -> int:
        return sum(self._in[v].values())

    def successors(self, v: str) -> dict[str, int]:
        return dict(self._out[v])

    def predecessors(self, v: str) -> dict[str, int]:
        return dict(self._in[v])

    def is_sink(self, v: str) -> bool:
        return all(u == v for u in self._out[v])

    @property
    def sinks(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.is_sink(v))

    def has_loops(self) -> bool:
        return any(u == v for u, v in self.mult)

    def strongly_connected_components(self) -> list[frozenset[str]]:
        """Tarjan's algorithm, iterative; components in discovery order."""
        index: dict[str, int] = {}
        low: dict[str, int] = {}
        on_stack: set[str] = set()
        stack: list[str] = []
        comps: list[frozenset[str]] = []
        counter = 0
        for root in self.vertices:
            if root in index:
                continue
            work = [(root, iter(sorted(self._out[root])))]
            index[root] = low[root] = counter
            counter += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                v, it = work[-1]
                advanced = False
                for w in it:
                    if w not in index:
                        index[w] = low[w] = counter
                        counter += 1
                        stack.append(w)
                        on_stack.add(w)
                        work.append((w, iter(sorted(self._out[w]))))
                        advanced = True
                        break
                    if w in on_stack:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.add(w)
                        if w == v:
                            break
                    comps.append(frozenset(comp))
        return comps

    def is_acyclic(self, ignore_loops: bool = False) -> bool:
        if not ignore_loops and self.has_loops():
            return False
        return all(len(c) == 1 for c in self.strongly_connected_components())

    def to_text(self) -> str:
        return "".join(f"{u} {v} {k}\n" for (u, v), k in self.mult.items())

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for (u, v), k in self.mult.items():
            lines.append(f'  "{u}" -> "{v}" [label="{k}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def closed_components(g: MultiGraph) -> list[frozenset[str]]:
    """Strongly connected components of size >= 2 with no edge leaving them."""
    out = []
    for comp in g.strongly_connected_components():
        if len(comp) < 2:
            continue
        if all(w in comp for v in comp for w in g.successors(v)):
            out.append(comp)
    return sorted(out, key=sorted)


def _check_vertex(g: MultiGraph, v: str) -> None:
    if v not in g.index:
        raise GameError(f"unknown vertex {v!r}")


def firable(g: MultiGraph, c: Configuration, v: str) -> bool:
    _check_vertex(g, v)
    return not g.is_sink(v) and c.get(v, 0) >= g.out_degree(v)


def fire(g: MultiGraph, c: Configuration, v: str) -> Configuration:
    if not firable(g, c, v):
        raise GameError(f"vertex {v!r} is not firable")
    out = {u: c.get(u, 0) for u in g.vertices}
    out[v] -= g.out_degree(v)
    for u, k in g.successors(v).items():
        out[u] += k
    if sum(out.values()) != sum(c.get(u, 0) for u in g.vertices):
        raise InternalError("chip count changed by a firing")
    return out


@dataclass
class LabeledSpace:
    """Configuration space of a game, explored exhaustively.

    ``configs[0]`` is the initial configuration.  ``covers`` holds
    ``(i, j, v)``: firing ``v`` in ``configs[i]`` gives ``configs[j]``.
    """

    graph: MultiGraph
    configs: list[tuple[int, ...]]
    shots: list[tuple[int, ...]]
    covers: list[tuple[int, int, str]]
    top: int
    _index: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {c: i for i, c in enumerate(self.configs)}

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def bottom(self) -> int:
        return 0

    def config(self, i: int) -> Configuration:
        return dict(zip(self.graph.vertices, self.configs[i]))

    def shot(self, i: int) -> ShotVector:
        return dict(zip(self.graph.vertices, self.shots[i]))

    def fired(self, i: int) -> frozenset[str]:
        return frozenset(v for v, n in zip(self.graph.vertices, self.shots[i]) if n)

    def find(self, c) -> int:
        """Index of a configuration given as a dict, tuple or index."""
        if isinstance(c, int):
            if not 0 <= c < len(self.configs):
                raise GameError(f"no configuration #{c}")
            return c
        if isinstance(c, dict):
            c = tuple(c.get(v, 0) for v in self.graph.vertices)
        try:
            return self._index[tuple(c)]
        except KeyError:
            raise GameError(f"configuration {c} not in space") from None

    def names(self) -> list[str]:
        return [f"c{i}" for i in range(len(self.configs))]

    def to_dag(self, names=None) -> CoverDag:
        names = names or self.names()
        return CoverDag(frozenset(names), frozenset((names[i], names[j]) for i, j, _ in self.covers))

    def cover_labels(self, names=None) -> dict[tuple[str, str], str]:
        names = names or self.names()
        return {(names[i], names[j]): v for i, j, v in self.covers}

    def lattice(self, names=None):
        from .lattice import Lattice

        return Lattice(self.to_dag(names))


def _compile(g: MultiGraph):
    n = len(g.vertices)
    deg = [g.out_degree(v) for v in g.vertices]
    active = [not g.is_sink(v) for v in g.vertices]
    delta = []
    for v in g.vertices:
        d = [0] * n
        for u, k in g.successors(v).items():
            d[g.index[u]] += k
        d[g.index[v]] -= deg[g.index[v]]
        delta.append(tuple(d))
    return deg, active, delta


def generate_space(g: MultiGraph, o: Configuration, cap: int | None = None, reverse: bool = False) -> LabeledSpace:
    """Breadth-first closure of the configurations reachable from ``o``.

    Refuses graphs with a closed component.  Raises CapExceeded once more
    than ``cap`` configurations have been discovered.  ``reverse`` flips the
    order in which firable vertices are tried; the resulting space must not
    depend on it.
    """
    cap = default_cap() if cap is None else cap
    if cap <= 0:
        raise GameError("cap must be positive")
    closed = closed_components(g)
    if closed:
        raise ClosedComponentError(closed)
    for v, k in o.items():
        _check_vertex(g, v)
        if k < 0:
            raise GameError(f"negative chip count at {v}")
    n = len(g.vertices)
    deg, active, delta = _compile(g)
    if any(sum(d) != 0 for d in delta):
        raise InternalError("firing does not conserve chips")
    order = [i for i in range(n) if active[i]]
    if reverse:
        order.reverse()

    def step(c, i):
        return tuple(a + b for a, b in zip(c, delta[i]))

    start = tuple(int(o.get(v, 0)) for v in g.vertices)
    configs = [start]
    shots = [(0,) * n]
    index = {start: 0}
    covers: list[tuple[int, int, str]] = []
    fixed = []
    queue = deque([0])
    while queue:
        ci = queue.popleft()
        c = configs[ci]
        fir = [i for i in order if c[i] >= deg[i]]
        if not fir:
            fixed.append(ci)
        for a, b in zip(fir, fir[1:]):
            ca = step(c, a)
            if ca[b] < deg[b] or step(ca, b) != step(step(c, b), a):
                raise InternalError(f"firings of {g.vertices[a]} and {g.vertices[b]} do not commute")
        for i in fir:
            nxt = step(c, i)
            shot = list(shots[ci])
            shot[i] += 1
            shot = tuple(shot)
            j = index.get(nxt)
            if j is None:
                j = len(configs)
                if j >= cap:
                    raise CapExceeded(f"more than {cap} configurations")
                index[nxt] = j
                configs.append(nxt)
                shots.append(shot)
                queue.append(j)
            elif shots[j] != shot:
                raise InternalError("shot-vector depends on the execution")
            covers.append((ci, j, g.vertices[i]))
    if len(fixed) != 1:
        raise InternalError(f"{len(fixed)} fixed points reached")
    covers.sort()
    return LabeledSpace(g, configs, shots, covers, fixed[0], index)


def is_simple(space: LabeledSpace) -> bool:
    return all(n <= 1 for n in space.shots[space.top])


def _dag_reachable(space: LabeledSpace, i: int, j: int) -> bool:
    succ: dict[int, list[int]] = {}
    for a, b, _ in space.covers:
        succ.setdefault(a, []).append(b)
    seen = {i}
    stack = [i]
    while stack:
        a = stack.pop()
        if a == j:
            return True
        for b in succ.get(a, ()):
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def reachable(space: LabeledSpace, c1, c2) -> bool:
    """Whether ``c2`` can be reached from ``c1`` by firings.

    Decided by componentwise shot-vector comparison and, independently, by a
    search of the cover graph; the two must agree.
    """
    i, j = space.find(c1), space.find(c2)
    by_shots = all(a <= b for a, b in zip(space.shots[i], space.shots[j]))
    by_graph = _dag_reachable(space, i, j)
    if by_shots != by_graph:
        raise InternalError(f"reachability disagreement between #{i} and #{j}")
    return by_shots


def parse_graph(text: str) -> MultiGraph:
    mult: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GameError(f"line {lineno}: expected 'U V K', got {line!r}")
        u, v, k = parts
        try:
            k = int(k)
        except ValueError:
            raise GameError(f"line {lineno}: multiplicity {k!r} is not an integer") from None
        if k < 1:
            raise GameError(f"line {lineno}: multiplicity must be >= 1")
        mult[u, v] = mult.get((u, v), 0) + k
    return MultiGraph(mult)


def parse_config(text: str) -> Configuration:
    out: Configuration = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GameError(f"line {lineno}: expected 'V N', got {line!r}")
        v, n = parts
        try:
            n = int(n)
        except ValueError:
            raise GameError(f"line {lineno}: chip count {n!r} is not an integer") from None
        if n < 0:
            raise GameError(f"line {lineno}: negative chip count")
        if v in out:
            raise GameError(f"line {lineno}: vertex {v} listed twice")
        out[v] = n
    return out


def format_config(c: Configuration) -> str:
    return "".join(f"{v} {n}\n" for v, n in sorted(c.items()))


def load_game(graph_text: str, config_text: str) -> tuple[MultiGraph, Configuration]:
    """Read a game; vertices named only in the configuration become isolated."""
    g = parse_graph(graph_text)
    o = parse_config(config_text)
    g = MultiGraph(g.mult, set(g.vertices) | set(o))
    return g, {v: o.get(v, 0) for v in g.vertices}


__all__ = [
    "SINK",
    "CapExceeded",
    "ClosedComponentError",
    "Configuration",
    "GameError",
    "LabeledSpace",
    "MultiGraph",
    "ShotVector",
    "closed_components",
    "fire",
    "firable",
    "format_config",
    "generate_space",
    "is_simple",
    "load_game",
    "parse_config",
    "parse_graph",
    "reachable",
]
