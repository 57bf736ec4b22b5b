from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from cfgkit.corpus import enumerate_games, random_game
from cfgkit.engine import SINK, generate_space
from cfgkit.lattice import analyze, is_distributive
from cfgkit.recognize import MODELS, build_script_g, is_acyclic, recognize, simple_only_sufficient
from cfgkit.verify import verify_witness
from lattices import boolean, chain, diamond, six_lattice, lattice, lattice_from_enablers, running_lattice
from test_lattice import random_enablers


def _all(lat):
    cert, ctx = analyze(lat)
    return cert, {m: recognize(lat, m, cert, ctx) for m in MODELS}


def test_diamond_witness_is_the_same_for_every_model():
    lat = diamond()
    cert, recs = _all(lat)
    for model, rec in recs.items():
        w = rec.witness
        assert w.graph.mult == {("a", SINK): 1, ("b", SINK): 1}
        assert w.initial == {"a": 1, "b": 1, SINK: 0}
        assert verify_witness(w, lat, cert).passed


def test_diamond_script_g_has_no_edges():
    _, ctx = analyze(diamond())
    sg = build_script_g(ctx)
    assert sg.edges == frozenset() and is_acyclic(sg)


def test_running_example_is_asm_but_not_acfg():
    lat = running_lattice()
    cert, recs = _all(lat)
    assert recs["cfg"] and recs["asm"]
    assert not recs["acfg"]
    assert str(recs["acfg"].rejection) == "script-G cycle: c6 -> c7 -> c6"
    for model in ("cfg", "asm"):
        assert verify_witness(recs[model].witness, lat, cert).passed


def test_running_example_script_g():
    _, ctx = analyze(running_lattice())
    sg = build_script_g(ctx)
    assert ("c6", "c7") in sg.edges and ("c7", "c6") in sg.edges
    assert not is_acyclic(sg)


def test_omega_infeasible_lattice_is_cfg_only():
    lat = six_lattice()
    cert, recs = _all(lat)
    assert recs["cfg"]
    assert verify_witness(recs["cfg"].witness, lat, cert).passed
    assert str(recs["asm"].rejection) == "Omega infeasible"
    assert not recs["acfg"]
    assert simple_only_sufficient(lat, cert)


def test_four_chain_script_g_is_acyclic():
    lat = chain(4)
    _, ctx = analyze(lat)
    sg = build_script_g(ctx)
    assert sg.edges == {("0", "1"), ("0", "2"), ("1", "2")}
    assert is_acyclic(sg)
    assert recognize(lat, "acfg")


def test_simple_only_sufficient_examples():
    assert simple_only_sufficient(diamond(), analyze(diamond())[0])
    assert not simple_only_sufficient(chain(3), analyze(chain(3))[0])


def test_one_element_lattice_gets_the_empty_game():
    lat = lattice([], ["only"])
    cert, recs = _all(lat)
    for rec in recs.values():
        assert rec.witness.graph.vertices == (SINK,)
        report = verify_witness(rec.witness, lat, cert)
        assert report.passed and report.space_size == 1


def test_distributive_lattices_are_acyclic_games():
    for lat in [chain(n) for n in range(2, 6)] + [boolean(k) for k in range(1, 4)]:
        cert, recs = _all(lat)
        assert all(recs.values())
        assert all(verify_witness(r.witness, lat, cert).passed for r in recs.values())


def _acyclic_non_distributive():
    for g, o in enumerate_games(max_vertices=4, max_mult=1, max_chips=2, loops=False):
        if not g.is_acyclic():
            continue
        space = generate_space(g, o)
        lat = space.lattice()
        if not is_distributive(lat):
            return lat
    return None


def test_acyclic_games_reach_beyond_distributive():
    lat = _acyclic_non_distributive()
    assert lat is not None
    cert, ctx = analyze(lat)
    rec = recognize(lat, "acfg", cert, ctx)
    assert rec and verify_witness(rec.witness, lat, cert).passed


def _check_inclusion_and_witnesses(lat):
    cert, recs = _all(lat)
    if recs["acfg"]:
        assert recs["asm"]
    if recs["asm"]:
        assert recs["cfg"]
    for model, rec in recs.items():
        if not rec:
            continue
        w = rec.witness
        assert verify_witness(w, lat, cert).passed
        if model == "asm":
            for (u, v), k in w.graph.mult.items():
                if SINK not in (u, v):
                    assert w.graph.E(v, u) == k
        if model == "acfg":
            assert w.graph.is_acyclic()
    if is_distributive(lat):
        assert recs["acfg"]
    return recs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 5))
def test_inclusion_chain_on_random_lattices(seed, n):
    lat = lattice_from_enablers(random_enablers(random.Random(seed), n))
    _check_inclusion_and_witnesses(lat)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_every_game_lattice_is_recognized(seed):
    g, o = random_game(random.Random(seed), max_vertices=4, max_mult=2)
    lat = generate_space(g, o).lattice()
    recs = _check_inclusion_and_witnesses(lat)
    assert recs["cfg"]
