from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfgkit.corpus import random_simple_game
from cfgkit.engine import SINK, MultiGraph, generate_space
from cfgkit.lattice import analyze, check_uld
from cfgkit.recognize import GameWitness, recognize
from cfgkit.verify import (
    INDETERMINATE,
    ISOMORPHIC,
    NOT_ISOMORPHIC,
    canonical_encoding,
    match_set_systems,
    spaces_isomorphic,
    verify_witness,
)
from lattices import RUNNING_NAMES, chain, diamond, six_lattice, lattice, running_game, running_lattice
from test_lattice import uld_lattices


def test_encoding_of_diamond():
    assert canonical_encoding(diamond()) == {"0": set(), "a": {"b"}, "b": {"a"}, "1": {"a", "b"}}


def test_encoding_of_three_chain():
    assert canonical_encoding(chain(3)) == {"0": set(), "1": {"0"}, "2": {"0", "1"}}


def test_encoding_of_running_example_is_the_fired_sets():
    enc = canonical_encoding(running_lattice())
    assert len(set(enc.values())) == 11
    assert {x: s for s, x in RUNNING_NAMES.items()} == enc


def test_running_game_space_is_the_running_lattice():
    lat = running_lattice()
    cert = check_uld(lat)
    g, o = running_game()
    iso = spaces_isomorphic(generate_space(g, o), lat, cert)
    assert iso.status == ISOMORPHIC
    assert sorted(iso.mapping.values()) == sorted(lat.elements)


def test_diamond_against_its_own_witness_and_a_chain():
    lat = diamond()
    cert = check_uld(lat)
    w = recognize(lat, "cfg").witness
    space = generate_space(w.graph, w.initial)
    assert spaces_isomorphic(space, lat, cert)
    other = chain(3)
    iso = spaces_isomorphic(space, other, check_uld(other))
    assert iso.status == NOT_ISOMORPHIC


@pytest.mark.parametrize("make", [diamond, running_lattice, six_lattice])
def test_mutated_witness_fails_late(make):
    lat = make()
    cert = check_uld(lat)
    w = recognize(lat, "cfg").witness
    for edge in w.graph.mult:
        mult = dict(w.graph.mult)
        mult[edge] += 1
        bad = GameWitness(MultiGraph(mult, w.graph.vertices), w.initial, "cfg")
        report = verify_witness(bad, lat, cert)
        assert not report.passed
        assert report.failed_stage in ("simple", "isomorphism")


def test_asymmetric_sandpile_fails_structure():
    lat = running_lattice()
    cert = check_uld(lat)
    w = recognize(lat, "asm").witness
    mult = dict(w.graph.mult)
    mult["c6", "c7"] += 1
    report = verify_witness(GameWitness(MultiGraph(mult), w.initial, "asm"), lat, cert)
    assert report.failed_stage == "structure"
    assert report.stages["termination"] is None


def test_non_simple_game_fails_stage_three():
    lat = chain(4)
    cert = check_uld(lat)
    w = GameWitness(MultiGraph({("v", SINK): 1}), {"v": 3, SINK: 0}, "cfg")
    report = verify_witness(w, lat, cert)
    assert report.failed_stage == "simple"
    assert "fires 3 times" in report.messages["simple"]


def test_cap_failure_is_reported_as_termination():
    lat = diamond()
    w = recognize(lat, "cfg").witness
    report = verify_witness(w, lat, check_uld(lat), cap=2)
    assert report.failed_stage == "termination"


def test_empty_lattice_witness_passes():
    lat = lattice([], ["z"])
    w = recognize(lat, "asm").witness
    report = verify_witness(w, lat, check_uld(lat))
    assert report.passed and report.to_dict()["bijection"] == [["c0", "z"]]


def test_foreign_space_is_matched_through_labels():
    rng = random.Random(7)
    g, o, space = random_simple_game(rng, max_vertices=4)
    lat = space.lattice()
    # rename meet-irreducibles away from the vertex names
    renamed = lattice([(f"x{a}", f"x{b}") for a, b in lat.covers], [f"x{lat.bottom}"])
    iso = spaces_isomorphic(space, renamed, check_uld(renamed))
    assert iso.status == ISOMORPHIC


def test_matching_gives_up_on_large_ambiguous_label_sets():
    labels = [f"l{i}" for i in range(9)]
    family = [frozenset()] + [frozenset({x}) for x in labels]
    status, _ = match_set_systems(family, family, labels, labels)
    assert status == INDETERMINATE
    status, pi = match_set_systems(family[:6], family[:6], labels[:5], labels[:5])
    assert status == ISOMORPHIC and len(pi) == 5


def test_report_is_deterministic():
    lat = running_lattice()
    cert = check_uld(lat)
    w = recognize(lat, "asm").witness
    assert verify_witness(w, lat, cert).to_dict() == verify_witness(w, lat, cert).to_dict()


@settings(max_examples=40, deadline=None)
@given(uld_lattices)
def test_encoding_is_an_order_embedding(lat):
    cert, _ = analyze(lat)
    enc = canonical_encoding(lat, cert)
    assert enc[lat.bottom] == frozenset() and enc[lat.top] == frozenset(lat.M)
    for x in lat.elements:
        for y in lat.elements:
            assert lat.leq(x, y) == (enc[x] <= enc[y])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9))
def test_fired_sets_of_simple_games_are_the_encoding(seed):
    g, o, space = random_simple_game(random.Random(seed), max_vertices=4)
    lat = space.lattice()
    cert = check_uld(lat)
    fired = {space.fired(i) for i in range(len(space))}
    assert len(fired) == len(space)
    # vertex v that fires labels exactly the covers of the meet-irreducible it names
    labels = {}
    names = space.names()
    for i, j, v in space.covers:
        labels.setdefault(v, set()).add(cert.label[names[i], names[j]])
    assert all(len(ms) == 1 for ms in labels.values())
    kappa = {v: next(iter(ms)) for v, ms in labels.items()}
    enc = canonical_encoding(lat, cert)
    assert {frozenset(kappa[v] for v in s) for s in fired} == set(enc.values())
