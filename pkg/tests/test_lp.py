"""The six-family LP over the coupling tree: shape, exactness, sandwich."""

from fractions import Fraction

import pytest

from holcount import (
    DomainError,
    InvalidBracket,
    build_lp,
    build_tree,
    check_feasible,
    compute_B,
    exact_tree_probabilities,
    marginal_ratio_exact,
    point_from_table,
    r_max,
    solve,
    to_rows,
    violated_constraints,
)
from fixtures import (
    halfedge_cycle4_instance,
    halfedge_fixtures,
    halfedge_path_instance,
    root_pins,
    single_halfedge_instance,
)

F = Fraction


def tree_for(instance, ell):
    sigma, tau, anchor, _ = root_pins(instance)
    return build_tree(instance, sigma, tau, anchor, ell)


def lp_for(instance, ell, r_minus, r_plus):
    tree = build_tree(*_root_args(instance), ell)
    return tree, build_lp(tree, instance, F(r_minus), F(r_plus), compute_B(instance))


def _root_args(instance):
    sigma, tau, anchor, _ = root_pins(instance)
    return instance, sigma, tau, anchor


# ----------------------------------------------------------------- structure


def test_variable_names_and_order():
    inst = halfedge_path_instance()
    tree, problem = lp_for(inst, 1, F(1, 2), F(1, 2))
    names = [v.name for v in problem.variables]
    # Two node variables per node; branch variables only at internal
    # feasible nodes, interleaved per frontier edge.
    assert names[:4] == ["ps:0", "pt:0", "pse:0:0", "pte:0:0"]
    assert all(
        problem.variables[problem.variable_index(n)].name == n for n in names
    )
    internal = [n for n in tree.nodes if not n.leaf and n.feasible]
    expected = 2 * len(tree.nodes) + 2 * sum(len(n.frontier) for n in internal)
    assert len(problem.variables) == expected


@pytest.mark.parametrize(
    "ell, counts",
    [
        (1, {1: 22, 2: 2, 3: 3, 4: 2, 5: 2, 6: 2}),
        (2, {1: 38, 2: 4, 3: 6, 4: 4, 5: 4, 6: 4}),
        (3, {1: 54, 2: 6, 3: 9, 4: 6, 5: 6, 6: 6}),
        (5, {1: 54, 2: 6, 3: 9, 4: 8, 5: 6, 6: 6}),
    ],
)
def test_family_counts_frozen(ell, counts):
    inst = halfedge_path_instance()
    _, problem = lp_for(inst, ell, F(1, 2), F(7, 10))
    assert problem.family_counts == counts


def test_cycle_problem_size_frozen():
    inst = halfedge_cycle4_instance()
    tree, problem = lp_for(inst, 4, F(1, 2), F(1, 2))
    assert len(tree) == 43
    assert len(problem.variables) == 114
    assert len(problem.constraints) == 382


def test_dump_is_deterministic_and_tagged():
    inst = halfedge_path_instance()
    _, p1 = lp_for(inst, 2, F(1, 3), F(2, 3))
    _, p2 = lp_for(inst, 2, F(1, 3), F(2, 3))
    assert p1.dump() == p2.dump()
    lines = p1.dump().splitlines()
    assert len(lines) == len(p1.constraints)
    assert all(line.startswith("f") and line[1].isdigit() for line in lines)
    # Exact rationals only — no floating point anywhere.
    assert "." not in p1.dump()


def test_to_rows_aligns_with_constraints():
    inst = halfedge_path_instance()
    _, problem = lp_for(inst, 1, F(1, 2), F(1, 2))
    rows = to_rows(problem)
    assert len(rows) == len(problem.constraints)
    for row, constraint in zip(rows, problem.constraints):
        assert row.coeffs == dict(constraint.coeffs)
        assert row.relation == constraint.relation
        assert row.rhs == constraint.rhs


def test_bracket_validation():
    inst = halfedge_path_instance()
    tree = tree_for(inst, 1)
    with pytest.raises(InvalidBracket):
        build_lp(tree, inst, F(-1, 10), F(1, 2), F(1, 3))
    with pytest.raises(InvalidBracket):
        build_lp(tree, inst, F(3, 4), F(1, 2), F(1, 3))
    with pytest.raises(DomainError):
        build_lp(tree, inst, F(1, 2), F(3, 4), F(0))
    with pytest.raises(DomainError):
        build_lp(tree, inst, F(1, 2), F(3, 4), F(3, 2))


# ------------------------------------------------------- exact-table points


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_exact_table_satisfies_lp_at_true_ratio(ell):
    inst = halfedge_path_instance()
    tree = tree_for(inst, ell)
    table = exact_tree_probabilities(inst, tree)
    R = marginal_ratio_exact(inst, tree.e_bot)
    assert R == F(3, 5)
    problem = build_lp(tree, inst, R, R, compute_B(inst))
    point = point_from_table(problem, table)
    assert violated_constraints(problem, point) == []
    assert check_feasible(problem)


def test_exact_table_satisfies_lp_on_all_fixtures():
    for name, inst in halfedge_fixtures():
        tree = tree_for(inst, 2)
        table = exact_tree_probabilities(inst, tree)
        R = marginal_ratio_exact(inst, tree.e_bot)
        problem = build_lp(tree, inst, R, R, compute_B(inst))
        point = point_from_table(problem, table)
        assert violated_constraints(problem, point) == [], name


def test_violated_constraints_reports_broken_rows():
    inst = halfedge_path_instance()
    tree = tree_for(inst, 2)
    table = exact_tree_probabilities(inst, tree)
    R = marginal_ratio_exact(inst, tree.e_bot)
    problem = build_lp(tree, inst, R, R, compute_B(inst))
    point = point_from_table(problem, table)
    point[problem.variable_index("ps:0")] = F(1, 2)  # root mass must be 1
    broken = violated_constraints(problem, point)
    assert broken
    assert all(problem.constraints[i].family in (1, 2, 4, 5) for i in broken)


# ------------------------------------------------------------- the sandwich


def test_single_good_leaf_closed_form():
    # One vertex, one half-edge, f = [1, 1/2]: the only good leaf ties the
    # two sides at ratio f(0)/f(1) = ... = R = 1/2, so the LP is feasible
    # exactly when the bracket admits r- <= 1/2 <= r+.
    inst = single_halfedge_instance(values=(1, F(1, 2)))
    tree = tree_for(inst, 1)
    R = marginal_ratio_exact(inst, 0)
    assert R == F(1, 2)
    B = compute_B(inst)
    for r_minus, r_plus, expected in [
        (F(1, 2), F(1, 2), True),
        (F(1, 4), F(3, 4), True),
        (F(0), F(1, 2), True),
        (F(51, 100), F(3, 4), False),
        (F(0), F(49, 100), False),
    ]:
        problem = build_lp(tree, inst, r_minus, r_plus, B)
        assert check_feasible(problem) is expected, (r_minus, r_plus)


@pytest.mark.parametrize("name_inst", halfedge_fixtures(), ids=lambda p: p[0])
def test_bracket_grid_sandwich(name_inst):
    # Containing brackets are always feasible; brackets that violate the
    # slack-adjusted sandwich are always infeasible.
    name, inst = name_inst
    ell = 2
    tree = tree_for(inst, ell)
    if inst.signature_of(tree.v_bot)(1) == 0:
        pytest.skip("sigma root infeasible")
    R = marginal_ratio_exact(inst, tree.e_bot)
    B = compute_B(inst)
    slack = 1 - (1 - B * B) ** ell
    rmax = r_max(inst)

    for lo, hi in [(R, R), (R * F(1, 2), R + F(1, 10)), (F(0), max(rmax, F(1)))]:
        if lo > hi:
            continue
        problem = build_lp(tree, inst, lo, hi, B)
        assert check_feasible(problem), (name, lo, hi)

    # Feasibility forces lo * slack <= R <= hi / slack; brackets entirely
    # outside that window must come back infeasible.
    far_low_hi = R * slack * F(9, 10)
    if far_low_hi > 0:
        problem = build_lp(tree, inst, F(0), far_low_hi, B)
        assert not check_feasible(problem), (name, "high side")
    far_lo = R / slack * F(11, 10)
    problem = build_lp(tree, inst, far_lo, far_lo + 1, B)
    assert not check_feasible(problem), (name, "low side")


def test_feasible_witness_is_verified_rational():
    inst = halfedge_path_instance()
    tree = tree_for(inst, 2)
    problem = build_lp(tree, inst, F(1, 2), F(7, 10), compute_B(inst))
    result = solve(problem)
    assert result.feasible
    assert all(isinstance(v, Fraction) for v in result.witness.values())
    assert violated_constraints(problem, result.witness) == []
