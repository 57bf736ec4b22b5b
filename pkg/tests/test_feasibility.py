from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from cfgkit.feasibility import (
    E,
    IneqSystem,
    IntegerizationError,
    LinearConstraint,
    Solution,
    StrictConstraintError,
    VarId,
    W,
    build_E,
    build_E_prime,
    build_Omega,
    integerize,
    parse_system,
    solve_nonneg,
)
from cfgkit.lattice import analyze
from cfgkit.simplex import EQ, GE, LE, find_feasible
from lattices import chain, diamond, six_lattice, infeasible_omega_text, lattice_from_enablers, running_lattice
from test_lattice import random_enablers


def _sys(rows, name=""):
    variables = sorted({v for c in rows for v, _ in c.lhs}, key=VarId.sort_key)
    return IneqSystem(tuple(variables), tuple(rows), name)


def test_variable_rules():
    with pytest.raises(ValueError):
        E("a", "a")
    assert str(W("c6")) == "w[c6]" and str(E("c8", "c6")) == "e[c8->c6]"
    assert W("a").sort_key() < E("0", "a").sort_key()


def test_unregistered_variable_rejected():
    row = LinearConstraint.make({W("a"): 1}, GE, 1)
    with pytest.raises(ValueError):
        IneqSystem((W("b"),), (row,))


def test_initial_systems_of_running_example():
    _, ctx = analyze(running_lattice())
    for m in ("c8", "c9"):
        s = build_E(ctx, m)
        assert s.dump() == f"w[{m}] >= 1\n"
        assert s.variables == (W(m),)


def test_system_of_c6_in_running_example():
    _, ctx = analyze(running_lattice())
    s = build_E(ctx, "c6")
    assert s.dump().splitlines() == [
        "w[c6] <= e[c8->c6]",
        "w[c6] <= e[c7->c6] + e[c9->c6]",
        "e[c9->c6] < w[c6]",
    ]
    assert s.variables == (W("c6"), E("c7", "c6"), E("c8", "c6"), E("c9", "c6"))


def test_system_of_c7_in_running_example():
    _, ctx = analyze(running_lattice())
    assert build_E(ctx, "c7").dump().splitlines() == [
        "w[c7] <= e[c9->c7]",
        "w[c7] <= e[c6->c7] + e[c8->c7]",
        "e[c8->c7] < w[c7]",
    ]


def test_bottom_of_three_chain_is_initial():
    _, ctx = analyze(chain(3))
    assert build_E(ctx, "0").dump() == "w[0] >= 1\n"


def test_build_e_rejects_non_irreducible():
    _, ctx = analyze(diamond())
    with pytest.raises(ValueError):
        build_E(ctx, "1")


def test_strict_elimination():
    _, ctx = analyze(running_lattice())
    prime = build_E_prime(build_E(ctx, "c6"))
    assert prime.dump().splitlines()[-1] == "e[c9->c6] + 1 <= w[c6]"
    assert not prime.has_strict
    unit = build_E(ctx, "c8")
    assert build_E_prime(unit).constraints == unit.constraints
    empty = IneqSystem((), ())
    assert build_E_prime(empty).constraints == ()


def test_solver_refuses_strict_rows():
    _, ctx = analyze(running_lattice())
    with pytest.raises(StrictConstraintError):
        solve_nonneg(build_E(ctx, "c6"))


def test_solve_running_systems():
    _, ctx = analyze(running_lattice())
    for m in ctx.M:
        s = build_E(ctx, m)
        sol = solve_nonneg(build_E_prime(s))
        assert sol is not None and not build_E_prime(s).check(sol.assignment)
        assert not s.check(integerize(sol, s).assignment)


def test_hand_solution_of_c6_satisfies_both_forms():
    _, ctx = analyze(running_lattice())
    s = build_E(ctx, "c6")
    point = {W("c6"): 1, E("c8", "c6"): 1, E("c7", "c6"): 1, E("c9", "c6"): 0}
    assert not build_E_prime(s).check(point)
    assert not s.check(point)


def test_integerize_scales_by_twice_the_variable_count():
    _, ctx = analyze(running_lattice())
    s = build_E(ctx, "c6")
    sol = Solution({W("c6"): Fraction(1), E("c8", "c6"): Fraction(1), E("c7", "c6"): Fraction(1), E("c9", "c6"): Fraction(0)})
    out = integerize(sol, s)
    assert out.as_dict() == {"w[c6]": "6", "e[c7->c6]": "6", "e[c8->c6]": "6", "e[c9->c6]": "0"}


def test_integerize_half_integral_input():
    m = "m"
    rows = (
        LinearConstraint.make({W(m): 1, E("a", m): -1}, LE, 0, "U", "p"),
        LinearConstraint.make({W(m): 1, E("b", m): -1}, LE, 0, "U", "q"),
    )
    s = _sys(rows)
    sol = Solution({W(m): Fraction(1, 2), E("a", m): Fraction(1, 2), E("b", m): Fraction(1, 2)})
    out = integerize(sol, s)
    assert out[E("a", m)] == out[E("b", m)] == 2
    assert out[W(m)] == 2
    assert not s.check(out.assignment)


def test_integerize_unit_system():
    s = _sys((LinearConstraint.make({W("a"): 1}, GE, 1, "unit"),))
    assert integerize(Solution({W("a"): Fraction(1)}), s)[W("a")] == 1
    assert integerize(Solution({W("a"): Fraction(3, 2)}), s)[W("a")] == 2


def test_integerize_reports_failure():
    m = "m"
    rows = (
        LinearConstraint.make({W(m): 1, E("a", m): -1}, LE, 0, "U", "p"),
        LinearConstraint.make({W(m): -1, E("a", m): 1}, "<", 0, "L", "q"),
    )
    s = _sys(rows)
    with pytest.raises(IntegerizationError):
        integerize(Solution({W(m): Fraction(1), E("a", m): Fraction(1)}), s)


def test_omega_of_running_example():
    _, ctx = analyze(running_lattice())
    om = build_Omega(ctx)
    assert len(om.constraints) == 9
    sym = [c for c in om.constraints if c.kind == "sym"]
    assert [str(c) for c in sym] == ["e[c6->c7] = e[c7->c6]"]
    assert solve_nonneg(build_E_prime(om)) is not None


def test_omega_of_diamond():
    _, ctx = analyze(diamond())
    assert build_Omega(ctx).dump() == "w[a] >= 1\nw[b] >= 1\n"


def test_transcribed_omega_matches_derived_lattice():
    ref = parse_system(infeasible_omega_text())
    assert len(ref.constraints) == 19
    _, ctx = analyze(six_lattice())
    assert build_Omega(ctx).normal_set() == ref.normal_set()


def test_transcribed_omega_is_infeasible():
    ref = parse_system(infeasible_omega_text())
    assert solve_nonneg(build_E_prime(ref)) is None


def test_parse_system_round_trip():
    _, ctx = analyze(six_lattice())
    om = build_Omega(ctx)
    again = parse_system(om.dump())
    assert again.normal_set() == om.normal_set()
    assert again.dump() == om.dump()


# --- solver against an independent floating-point LP --------------------

def _scipy_feasible(rows, n):
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, rel, rhs in rows:
        if rel == LE:
            a_ub.append(coeffs)
            b_ub.append(rhs)
        elif rel == GE:
            a_ub.append([-c for c in coeffs])
            b_ub.append(-rhs)
        else:
            a_eq.append(coeffs)
            b_eq.append(rhs)
    res = linprog(
        [0] * n,
        A_ub=a_ub or None,
        b_ub=b_ub or None,
        A_eq=a_eq or None,
        b_eq=b_eq or None,
        bounds=[(0, None)] * n,
        method="highs",
    )
    return res.status == 0


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(1, 5))
    rows = []
    for _ in range(k):
        coeffs = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
        rel = draw(st.sampled_from([LE, GE, EQ]))
        rhs = draw(st.integers(-4, 4))
        rows.append((coeffs, rel, rhs))
    return rows, n


@settings(max_examples=300, deadline=None)
@given(small_lps())
def test_simplex_agrees_with_scipy(lp):
    rows, n = lp
    point = find_feasible(rows, n)
    assert (point is not None) == _scipy_feasible(rows, n)
    if point is not None:
        assert all(x >= 0 for x in point)
        for coeffs, rel, rhs in rows:
            total = sum(c * x for c, x in zip(coeffs, point))
            assert {LE: total <= rhs, GE: total >= rhs, EQ: total == rhs}[rel]


def test_simplex_is_deterministic():
    rows = [([1, 1, -1], LE, 0), ([0, 1, 1], GE, 2), ([1, 0, 1], EQ, 3)]
    assert find_feasible(rows, 3) == find_feasible(rows, 3)


# --- integer solutions by brute force -------------------------------------

def _brute_force_integer(sys: IneqSystem, bound: int):
    for values in product(range(bound + 1), repeat=len(sys.variables)):
        point = dict(zip(sys.variables, map(Fraction, values)))
        if not sys.check(point):
            return point
    return None


enabler_lattices = st.builds(
    lambda seed, n: lattice_from_enablers(random_enablers(random.Random(seed), n)),
    st.integers(0, 10**9),
    st.integers(2, 4),
)


@settings(max_examples=40, deadline=None)
@given(enabler_lattices)
def test_integer_solutions_imply_rational_feasibility(lat):
    _, ctx = analyze(lat)
    for m in ctx.M:
        s = build_E(ctx, m)
        if len(s.variables) > 5:
            continue
        found = _brute_force_integer(s, 3)
        sol = solve_nonneg(build_E_prime(s))
        if found is not None:
            assert sol is not None
        if sol is not None:
            assert not s.check(integerize(sol, s).assignment)


@settings(max_examples=40, deadline=None)
@given(enabler_lattices)
def test_doubling_keeps_weak_rows(lat):
    _, ctx = analyze(lat)
    for m in ctx.M:
        prime = build_E_prime(build_E(ctx, m))
        sol = solve_nonneg(prime)
        if sol is None:
            continue
        doubled = {v: 2 * q for v, q in sol.assignment.items()}
        # rows with rhs 0 are homogeneous; the +1 slack rows only get more room
        assert not prime.check(doubled)
