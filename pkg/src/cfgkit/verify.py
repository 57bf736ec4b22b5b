"""Certification of witness games against the lattice they should generate."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

from .engine import GameError, LabeledSpace, generate_space, is_simple
from .lattice import SINK, InternalError, Lattice, NotALatticeError, NotULDError, UldCertificate, check_uld
from .recognize import GameWitness

ISOMORPHIC = "isomorphic"
NOT_ISOMORPHIC = "not-isomorphic"
INDETERMINATE = "indeterminate"

EXHAUSTIVE_LIMIT = 8


def canonical_encoding(lat: Lattice, cert: UldCertificate | None = None) -> dict[str, frozenset[str]]:
    """Map every element x to M minus M_x, the meet-irreducibles already passed."""
    M = frozenset(lat.M)
    enc = {x: M - lat.M_of[x] for x in lat.elements}
    if len(set(enc.values())) != len(enc):
        raise InternalError("canonical encoding is not injective")
    return enc


@dataclass(frozen=True)
class IsoResult:
    status: str
    mapping: dict[int, str] = field(default_factory=dict)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == ISOMORPHIC


def _direct(space: LabeledSpace, lat: Lattice, cert: UldCertificate) -> IsoResult:
    enc = canonical_encoding(lat, cert)
    by_set = {s: x for x, s in enc.items()}
    mapping = {}
    for i in range(len(space)):
        x = by_set.get(space.fired(i))
        if x is None:
            return IsoResult(NOT_ISOMORPHIC, reason=f"fired set {sorted(space.fired(i))} is not an element")
        mapping[i] = x
    if len(set(mapping.values())) != len(mapping) or len(mapping) != len(lat):
        return IsoResult(NOT_ISOMORPHIC, reason="fired sets do not match the elements one-to-one")
    image = {(mapping[i], mapping[j], v) for i, j, v in space.covers}
    expected = {(x, y, cert.label[x, y]) for x, y in lat.covers}
    if image != expected:
        return IsoResult(NOT_ISOMORPHIC, reason="cover relations or their labels differ")
    return IsoResult(ISOMORPHIC, mapping)


def _signature(label, family) -> tuple:
    return tuple(sorted(len(s) for s in family if label in s))


def match_set_systems(fam_a, fam_b, labels_a, labels_b):
    """Find a bijection labels_a -> labels_b carrying fam_a onto fam_b.

    Returns (status, bijection).  Candidates are restricted to labels with
    equal usage signatures; ambiguous classes are searched exhaustively only
    when there are at most EXHAUSTIVE_LIMIT labels.
    """
    fam_a, fam_b = set(fam_a), set(fam_b)
    if len(fam_a) != len(fam_b) or len(labels_a) != len(labels_b):
        return NOT_ISOMORPHIC, None
    classes_a: dict[tuple, list] = {}
    classes_b: dict[tuple, list] = {}
    for lab in sorted(labels_a):
        classes_a.setdefault(_signature(lab, fam_a), []).append(lab)
    for lab in sorted(labels_b):
        classes_b.setdefault(_signature(lab, fam_b), []).append(lab)
    if {k: len(v) for k, v in classes_a.items()} != {k: len(v) for k, v in classes_b.items()}:
        return NOT_ISOMORPHIC, None
    keys = sorted(classes_a)
    ambiguous = any(len(classes_a[k]) > 1 for k in keys)
    if ambiguous and len(labels_a) > EXHAUSTIVE_LIMIT:
        return INDETERMINATE, None
    for choice in product(*(permutations(classes_b[k]) for k in keys)):
        pi = {}
        for k, perm in zip(keys, choice):
            pi.update(zip(classes_a[k], perm))
        if {frozenset(pi[x] for x in s) for s in fam_a} == fam_b:
            return ISOMORPHIC, pi
    return NOT_ISOMORPHIC, None


def _foreign(space: LabeledSpace, lat: Lattice) -> IsoResult:
    try:
        other = space.lattice()
        other_cert = check_uld(other)
    except (NotALatticeError, NotULDError) as exc:
        return IsoResult(NOT_ISOMORPHIC, reason=f"space is not a ULD lattice: {exc}")
    enc_a = canonical_encoding(other, other_cert)
    enc_b = canonical_encoding(lat)
    status, pi = match_set_systems(enc_a.values(), enc_b.values(), other.M, lat.M)
    if status != ISOMORPHIC:
        return IsoResult(status, reason="canonical set systems differ" if status == NOT_ISOMORPHIC else "ambiguous label classes")
    by_set = {s: x for x, s in enc_b.items()}
    names = space.names()
    mapping = {i: by_set[frozenset(pi[m] for m in enc_a[names[i]])] for i in range(len(space))}
    return IsoResult(ISOMORPHIC, mapping)


def spaces_isomorphic(space: LabeledSpace, lat: Lattice, cert: UldCertificate) -> IsoResult:
    """Compare a generated space with a ULD lattice.

    For a simple game whose fired vertices are meet-irreducibles of ``lat``
    the comparison is a direct equality of set systems and cover labels.
    Anything else goes through canonical set systems up to relabelling.
    """
    if len(space) != len(lat):
        return IsoResult(NOT_ISOMORPHIC, reason=f"{len(space)} configurations vs {len(lat)} elements")
    fired = {v for _, _, v in space.covers}
    if is_simple(space) and fired <= set(lat.M):
        return _direct(space, lat, cert)
    return _foreign(space, lat)


STAGES = ("structure", "termination", "simple", "isomorphism")


@dataclass
class VerificationReport:
    stages: dict[str, bool | None] = field(default_factory=lambda: dict.fromkeys(STAGES))
    messages: dict[str, str] = field(default_factory=dict)
    mapping: dict[int, str] = field(default_factory=dict)
    space_size: int = 0

    @property
    def passed(self) -> bool:
        return all(self.stages[s] for s in STAGES)

    @property
    def failed_stage(self) -> str | None:
        return next((s for s in STAGES if self.stages[s] is False), None)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "stages": {s: ("pass" if v else "fail" if v is False else "skipped") for s, v in self.stages.items()},
            "messages": dict(sorted(self.messages.items())),
            "bijection": [[f"c{i}", x] for i, x in sorted(self.mapping.items())],
        }


def structural_problems(w: GameWitness) -> list[str]:
    g = w.graph
    problems = []
    if any(n < 0 for n in w.initial.values()):
        problems.append("negative chips in initial configuration")
    non_sink = [v for v in g.vertices if not g.is_sink(v)]
    if w.model == "cfg" or w.model == "acfg":
        if g.has_loops():
            problems.append("graph has loops")
        for v in non_sink:
            if g.E(v, SINK) < 1:
                problems.append(f"{v} has no edge to the sink")
    if w.model == "asm":
        if g.sinks != (SINK,):
            problems.append(f"expected the single sink {SINK}, found {list(g.sinks)}")
        for v in g.vertices:
            for u in g.vertices:
                if u < v and SINK not in (u, v) and g.E(u, v) != g.E(v, u):
                    problems.append(f"E({u},{v})={g.E(u, v)} but E({v},{u})={g.E(v, u)}")
    if w.model == "acfg" and not g.is_acyclic():
        problems.append("support graph has a cycle")
    return problems


def verify_witness(w: GameWitness, lat: Lattice, cert: UldCertificate, cap: int | None = None) -> VerificationReport:
    rep = VerificationReport()
    problems = structural_problems(w)
    rep.stages["structure"] = not problems
    if problems:
        rep.messages["structure"] = "; ".join(problems)
        return rep
    try:
        space = generate_space(w.graph, w.initial, cap=cap)
    except GameError as exc:
        rep.stages["termination"] = False
        rep.messages["termination"] = str(exc)
        return rep
    rep.stages["termination"] = True
    rep.space_size = len(space)
    rep.stages["simple"] = is_simple(space)
    if not rep.stages["simple"]:
        worst = max(zip(space.shots[space.top], space.graph.vertices))
        rep.messages["simple"] = f"{worst[1]} fires {worst[0]} times"
        return rep
    iso = spaces_isomorphic(space, lat, cert)
    rep.stages["isomorphism"] = bool(iso)
    if iso:
        rep.mapping = iso.mapping
    else:
        rep.messages["isomorphism"] = f"{iso.status}: {iso.reason}"
    return rep
