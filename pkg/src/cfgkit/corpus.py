"""Random and exhaustive game corpora used by property tests and ``gen-random``."""
from __future__ import annotations

import random
from itertools import permutations, product

from .engine import LabeledSpace, MultiGraph, closed_components, generate_space, is_simple
from .lattice import SINK


def random_game(rng: random.Random, max_vertices: int = 5, max_mult: int = 3, loops: bool = True, chips: str = "uniform"):
    """One random game with a sink edge at every vertex (so no closed component).

    With ``chips="uniform"`` each vertex gets ``0 .. 2 * out-degree`` chips.
    With ``chips="deficit"`` it gets its out-degree minus up to its non-loop
    in-degree, so it tends to fire once after hearing from its neighbours;
    this makes simple games with several firing vertices common.
    """
    n = rng.randint(1, max_vertices)
    names = [f"v{i}" for i in range(1, n + 1)]
    mult = {}
    for u in names:
        mult[u, SINK] = rng.randint(1, max_mult)
        for v in names:
            if u == v and not loops:
                continue
            # sparse: most pairs get no edge
            if rng.random() < (0.15 if u == v else 0.4):
                mult[u, v] = rng.randint(1, max_mult)
    g = MultiGraph(mult, names + [SINK])
    if chips == "uniform":
        config = {v: rng.randint(0, 2 * g.out_degree(v)) for v in names}
    elif chips == "deficit":
        config = {v: max(0, g.out_degree(v) - rng.randint(0, g.in_degree(v) - g.E(v, v))) for v in names}
    else:
        raise ValueError(f"unknown chip scheme {chips!r}")
    config[SINK] = 0
    return g, config


def random_simple_game(rng: random.Random, max_vertices: int = 5, max_mult: int = 3, loops: bool = True, tries: int = 1000):
    """Rejection-sample ``random_game`` (deficit chips) until the game is simple.

    Returns ``(graph, initial, space)``.
    """
    for _ in range(tries):
        g, chips = random_game(rng, max_vertices, max_mult, loops, chips="deficit")
        space = generate_space(g, chips)
        if is_simple(space):
            return g, chips, space
    raise RuntimeError("no simple game found")


def _canonical_graph(n: int, mult: dict[tuple[int, int], int]) -> tuple:
    # vertex n is the sink and stays fixed
    best = None
    for perm in permutations(range(n)):
        p = list(perm) + [n]
        key = tuple(sorted((p[u], p[v], k) for (u, v), k in mult.items()))
        if best is None or key < best:
            best = key
    return best


def enumerate_games(
    max_vertices: int = 3, max_mult: int = 2, max_chips: int = 3, loops: bool = True, reduce_loops: bool = True
):
    """Every game with up to ``max_vertices`` non-sink vertices, one sink.

    Edge slots are u -> v for non-sink u and any v (loops included when
    ``loops``); each slot has multiplicity 0..max_mult.  Graphs are taken up
    to relabelling of the non-sink vertices and graphs with a closed
    component are skipped.  Yields ``(graph, initial)``.

    With ``reduce_loops`` a vertex carrying k loops only gets fewer than k
    chips: with k or more it always keeps at least k, and the game moves
    exactly like the loop-free one with k fewer chips, which is enumerated
    anyway.
    """
    for n in range(1, max_vertices + 1):
        names = [f"v{i}" for i in range(1, n + 1)] + [SINK]
        slots = [(u, v) for u in range(n) for v in range(n + 1) if loops or u != v]
        seen = set()
        for ks in product(range(max_mult + 1), repeat=len(slots)):
            mult = {s: k for s, k in zip(slots, ks) if k}
            key = _canonical_graph(n, mult)
            if key in seen:
                continue
            seen.add(key)
            g = MultiGraph({(names[u], names[v]): k for (u, v), k in mult.items()}, names)
            if closed_components(g):
                continue
            ranges = []
            for u in range(n):
                k = mult.get((u, u), 0)
                ranges.append(range(min(k, max_chips + 1) if k and reduce_loops else max_chips + 1))
            for chips in product(*ranges):
                o = dict(zip(names, chips))
                o[SINK] = 0
                yield g, o


def space_key(space: LabeledSpace) -> tuple:
    """The cover graph on BFS indices.

    Equal keys mean isomorphic lattices (the converse need not hold), which
    is enough to skip repeats when sweeping many games.
    """
    return (len(space), tuple((i, j) for i, j, _ in space.covers))
