"""Finite posets given by their cover relation, lattice validation and the
upper-locally-distributive (ULD) machinery built on meet-irreducibles.

Elements are arbitrary whitespace-free strings.  Everything that iterates
over elements does so in lexicographic order so that derived output is
reproducible.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

log = logging.getLogger(__name__)

SINK = "__sink"


class PosetError(ValueError):
    """Malformed cover-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotALatticeError(ValueError):
    def __init__(self, message: str, witness: tuple[str, str] | None = None):
        self.witness = witness
        super().__init__(message)


class NotULDError(ValueError):
    def __init__(self, cover: tuple[str, str], m_x: frozenset, m_y: frozenset):
        self.cover = cover
        self.m_x = m_x
        self.m_y = m_y
        x, y = cover
        super().__init__(
            f"cover {x} < {y} violates the ULD criterion: "
            f"M_{x}={sorted(m_x)}, M_{y}={sorted(m_y)}"
        )


class InternalError(AssertionError):
    """A consistency check that can only fail through a bug."""


@dataclass(frozen=True)
class CoverDag:
    elements: frozenset[str]
    covers: frozenset[tuple[str, str]]
    # transitive edges that were dropped while normalizing the input
    redundant: frozenset[tuple[str, str]] = frozenset()

    @classmethod
    def from_covers(cls, covers, elements=()) -> "CoverDag":
        covers = frozenset((str(x), str(y)) for x, y in covers)
        elems = set(elements)
        for x, y in covers:
            elems.update((x, y))
        return _normalize(frozenset(elems), covers)


def _topo_order(elements, succ) -> list[str] | None:
    indeg = {x: 0 for x in elements}
    for x in elements:
        for y in succ[x]:
            indeg[y] += 1
    ready = sorted(x for x, d in indeg.items() if d == 0)
    order = []
    while ready:
        x = ready.pop(0)
        order.append(x)
        for y in sorted(succ[x]):
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
        ready.sort()
    if len(order) != len(indeg):
        return None
    return order


def _normalize(elements: frozenset[str], edges: frozenset[tuple[str, str]]) -> CoverDag:
    if SINK in elements:
        raise PosetError(f"element id {SINK!r} is reserved")
    succ: dict[str, set[str]] = {x: set() for x in elements}
    for x, y in edges:
        if x == y:
            raise PosetError(f"cycle detected: self-loop at {x}")
        succ[x].add(y)
    order = _topo_order(elements, succ)
    if order is None:
        raise PosetError("cycle detected in cover relation")
    # reachability by strict successors, computed bottom-up in reverse topological order
    reach: dict[str, set[str]] = {}
    for x in reversed(order):
        r: set[str] = set()
        for y in succ[x]:
            r.add(y)
            r |= reach[y]
        reach[x] = r
    covers, redundant = set(), set()
    for x, y in edges:
        if any(y in reach[z] for z in succ[x] if z != y):
            redundant.add((x, y))
        else:
            covers.add((x, y))
    for x, y in sorted(redundant):
        log.warning("dropping transitive edge %s %s", x, y)
    return CoverDag(elements, frozenset(covers), frozenset(redundant))


def parse_poset(text: str) -> CoverDag:
    """Parse the cover-list format: one ``X Y`` pair per line meaning X < Y.

    ``#`` starts a comment and blank lines are skipped.  A line with a single
    id declares an element without covers (only useful for the one-element
    lattice).  Transitive edges are dropped with a warning.
    """
    elements: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            elements.add(parts[0])
        elif len(parts) == 2:
            x, y = parts
            if x == SINK or y == SINK:
                raise PosetError(f"element id {SINK!r} is reserved", lineno)
            elements.update(parts)
            edges.add((x, y))
        else:
            raise PosetError(f"expected 'X Y', got {line!r}", lineno)
    return _normalize(frozenset(elements), frozenset(edges))


def format_poset(dag: CoverDag, labels: dict | None = None) -> str:
    lines = []
    touched = set()
    for x, y in sorted(dag.covers):
        touched.update((x, y))
        if labels and (x, y) in labels:
            lines.append(f"{x} {y} # {labels[x, y]}")
        else:
            lines.append(f"{x} {y}")
    lines.extend(sorted(dag.elements - touched))
    return "\n".join(lines) + "\n"


class Lattice:
    """A validated finite lattice.

    Order queries use bitsets over the lexicographic element index; meets and
    joins are looked up by intersecting down-sets (resp. up-sets).
    """

    def __init__(self, dag: CoverDag):
        if not dag.elements:
            raise NotALatticeError("empty poset")
        self.dag = dag
        self.elements: tuple[str, ...] = tuple(sorted(dag.elements))
        self.index = {x: i for i, x in enumerate(self.elements)}
        n = len(self.elements)
        up_cov: list[list[int]] = [[] for _ in range(n)]
        low_cov: list[list[int]] = [[] for _ in range(n)]
        for x, y in dag.covers:
            up_cov[self.index[x]].append(self.index[y])
            low_cov[self.index[y]].append(self.index[x])
        self._up_cov = [tuple(sorted(c)) for c in up_cov]
        self._low_cov = [tuple(sorted(c)) for c in low_cov]

        succ = {x: {self.elements[j] for j in self._up_cov[i]} for i, x in enumerate(self.elements)}
        order = [self.index[x] for x in _topo_order(self.elements, succ)]
        self._topo = tuple(order)
        up = [0] * n
        for i in reversed(order):
            b = 1 << i
            for j in self._up_cov[i]:
                b |= up[j]
            up[i] = b
        down = [0] * n
        for i in order:
            b = 1 << i
            for j in self._low_cov[i]:
                b |= down[j]
            down[i] = b
        self._up = up
        self._down = down
        self._by_down = {b: i for i, b in enumerate(down)}
        self._by_up = {b: i for i, b in enumerate(up)}

        self._check_lattice()
        full = (1 << n) - 1
        self.bottom = self.elements[self._by_up[full]]
        self.top = self.elements[self._by_down[full]]

        self.M: tuple[str, ...] = tuple(x for i, x in enumerate(self.elements) if len(self._up_cov[i]) == 1)
        self.J: tuple[str, ...] = tuple(x for i, x in enumerate(self.elements) if len(self._low_cov[i]) == 1)
        self.M_of: dict[str, frozenset[str]] = {
            x: frozenset(m for m in self.M if self.leq(x, m)) for x in self.elements
        }
        self.J_of: dict[str, frozenset[str]] = {
            x: frozenset(j for j in self.J if self.leq(j, x)) for x in self.elements
        }

    def _check_lattice(self) -> None:
        n = len(self.elements)
        for i, k in combinations(range(n), 2):
            if (self._up[i] & self._up[k]) not in self._by_up:
                raise NotALatticeError(
                    f"{self.elements[i]} and {self.elements[k]} have no least upper bound: "
                    f"minimal upper bounds {self._extremes(self._up[i] & self._up[k], minimal=True)}",
                    (self.elements[i], self.elements[k]),
                )
            if (self._down[i] & self._down[k]) not in self._by_down:
                raise NotALatticeError(
                    f"{self.elements[i]} and {self.elements[k]} have no greatest lower bound: "
                    f"maximal lower bounds {self._extremes(self._down[i] & self._down[k], minimal=False)}",
                    (self.elements[i], self.elements[k]),
                )

    def _extremes(self, bits: int, minimal: bool) -> list[str]:
        idx = [i for i in range(len(self.elements)) if bits >> i & 1]
        rel = self._up if minimal else self._down
        out = []
        for i in idx:
            others = bits & rel[i] & ~(1 << i)
            if not others:
                out.append(self.elements[i])
        return out

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"Lattice({len(self)} elements, |M|={len(self.M)}, |J|={len(self.J)})"

    @property
    def covers(self) -> frozenset[tuple[str, str]]:
        return self.dag.covers

    def upper_covers(self, x: str) -> tuple[str, ...]:
        return tuple(self.elements[j] for j in self._up_cov[self.index[x]])

    def lower_covers(self, x: str) -> tuple[str, ...]:
        return tuple(self.elements[j] for j in self._low_cov[self.index[x]])

    def leq(self, x: str, y: str) -> bool:
        return bool(self._up[self.index[x]] >> self.index[y] & 1)

    def up_set(self, x: str) -> frozenset[str]:
        return self._from_bits(self._up[self.index[x]])

    def down_set(self, x: str) -> frozenset[str]:
        return self._from_bits(self._down[self.index[x]])

    def _from_bits(self, bits: int) -> frozenset[str]:
        return frozenset(x for i, x in enumerate(self.elements) if bits >> i & 1)

    def meet(self, x: str, y: str) -> str:
        return self.elements[self._by_down[self._down[self.index[x]] & self._down[self.index[y]]]]

    def join(self, x: str, y: str) -> str:
        return self.elements[self._by_up[self._up[self.index[x]] & self._up[self.index[y]]]]

    def minimal(self, xs) -> list[str]:
        xs = set(xs)
        return sorted(x for x in xs if not any(y != x and self.leq(y, x) for y in xs))

    def maximal(self, xs) -> list[str]:
        xs = set(xs)
        return sorted(x for x in xs if not any(y != x and self.leq(x, y) for y in xs))

    def height(self) -> int:
        """Length (in covers) of the longest chain from bottom to top."""
        depth = [0] * len(self.elements)
        for i in self._topo:
            for j in self._up_cov[i]:
                depth[j] = max(depth[j], depth[i] + 1)
        return depth[self.index[self.top]]

    def maximal_chains(self, limit: int | None = None):
        """Yield maximal chains bottom..top as tuples of elements."""
        count = 0
        stack = [(self.bottom,)]
        while stack:
            chain = stack.pop()
            last = chain[-1]
            if last == self.top:
                yield chain
                count += 1
                if limit is not None and count >= limit:
                    return
                continue
            for y in reversed(self.upper_covers(last)):
                stack.append(chain + (y,))


def validate_lattice(dag: CoverDag) -> Lattice:
    return Lattice(dag)


def parse_lattice(text: str) -> Lattice:
    return Lattice(parse_poset(text))


@dataclass(frozen=True)
class UldCertificate:
    label: dict[tuple[str, str], str]
    height: int


def check_uld(lat: Lattice) -> UldCertificate:
    """Label every cover x < y with the unique meet-irreducible in M_x minus M_y.

    Raises NotULDError at the first offending cover (lexicographic order).
    """
    label = {}
    for x, y in sorted(lat.covers):
        mx, my = lat.M_of[x], lat.M_of[y]
        diff = mx - my
        if not (my < mx and len(diff) == 1):
            raise NotULDError((x, y), mx, my)
        label[x, y] = next(iter(diff))
    height = lat.height()
    if height != len(lat.M):
        raise InternalError(f"ULD lattice with height {height} but |M|={len(lat.M)}")
    return UldCertificate(label, height)


@dataclass(frozen=True)
class IrreducibleContext:
    lattice: Lattice
    cert: UldCertificate
    U: dict[str, tuple[str, ...]]
    L: dict[str, tuple[str, ...]]
    # M \ M_a for every a occurring in some U_m or L_m
    below: dict[str, frozenset[str]] = field(repr=False)

    @property
    def M(self) -> tuple[str, ...]:
        return self.lattice.M

    def is_initial(self, m: str) -> bool:
        """True when m can fire from the bottom, i.e. U_m is the bottom alone."""
        return self.U[m] == (self.lattice.bottom,)

    def u_vars(self, m: str) -> frozenset[str]:
        return frozenset().union(*(self.below[a] for a in self.U[m]))

    def all_vars(self, m: str) -> frozenset[str]:
        return frozenset().union(*(self.below[a] for a in self.U[m] + self.L[m]))


def _u_from_join_irreducibles(lat: Lattice, m: str) -> list[str]:
    outside = lat._from_bits(~lat._down[lat.index[m]] & ((1 << len(lat)) - 1))
    minimal_outside = set(lat.minimal(outside))
    return sorted({lat.lower_covers(j)[0] for j in lat.J if j in minimal_outside})


def compute_context(lat: Lattice, cert: UldCertificate) -> IrreducibleContext:
    fires: dict[str, set[str]] = {m: set() for m in lat.M}
    for (x, _y), m in cert.label.items():
        fires[m].add(x)
    U, L = {}, {}
    for m in lat.M:
        U[m] = tuple(lat.minimal(fires[m]))
        alt = _u_from_join_irreducibles(lat, m)
        if list(U[m]) != alt:
            raise InternalError(f"U_{m} mismatch: {U[m]} vs join-irreducible route {alt}")
        above = set()
        for a in U[m]:
            above |= lat.up_set(a)
        L[m] = tuple(lat.maximal(set(lat.elements) - above))
    M = frozenset(lat.M)
    below = {}
    for m in lat.M:
        for a in U[m] + L[m]:
            below[a] = M - lat.M_of[a]
    return IrreducibleContext(lat, cert, U, L, below)


def is_distributive(lat: Lattice) -> bool:
    es = lat.elements
    for x in es:
        for y in es:
            for z in es:
                if lat.meet(x, lat.join(y, z)) != lat.join(lat.meet(x, y), lat.meet(x, z)):
                    return False
    return True


def analyze(lat: Lattice) -> tuple[UldCertificate, IrreducibleContext]:
    cert = check_uld(lat)
    return cert, compute_context(lat, cert)
