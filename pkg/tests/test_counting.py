"""End-to-end approximate counting: sandwiches, clamps, front doors."""

from fractions import Fraction

import pytest

from holcount import (
    CountEstimate,
    EPS_CLAMP,
    InstanceInvalid,
    InternalError,
    InvalidB,
    RatioEstimate,
    approx_partition_function,
    build_graph,
    count_b_edge_covers,
    count_b_matchings,
    partition_function,
)
from fixtures import (
    atmost_instance,
    cycle_instance,
    halfedge_path_instance,
    path_instance,
    star_instance,
    triangle_instance,
    weighted_instance,
)

F = Fraction


def assert_sandwich(estimate, truth):
    eps = estimate.epsilon
    assert truth * (1 - eps) <= estimate.value <= truth * (1 + eps)


# ------------------------------------------------------------ Z estimation


@pytest.mark.parametrize("eps", [F(3, 20), F(6, 25)])
@pytest.mark.parametrize(
    "make, z",
    [
        (lambda: path_instance(3, 1), 5),
        (lambda: cycle_instance(4, 1), 7),
        (lambda: triangle_instance(1), 4),
        (lambda: star_instance(3, 2), 7),
    ],
)
def test_partition_sandwich(make, z, eps):
    inst = make()
    assert partition_function(inst) == z
    est = approx_partition_function(inst, eps)
    assert est.epsilon == eps
    assert len(est.per_edge_ratios) == len(inst.graph.normal_edges)
    assert_sandwich(est, z)


def test_weighted_sandwich():
    inst = weighted_instance(
        "abc",
        [("a", "b"), ("b", "c")],
        {"a": (1, 2), "b": (1, 1, 0), "c": (3, 1)},
    )
    truth = partition_function(inst)
    est = approx_partition_function(inst, F(1, 10))
    assert_sandwich(est, truth)
    # base = product of f_v(0) = 1 * 1 * 3.
    assert est.base == 3


def test_edgeless_counts_exactly():
    inst = weighted_instance("ab", [], {"a": (2,), "b": (5,)})
    est = approx_partition_function(inst, F(1, 10))
    assert est == CountEstimate(F(10), F(1, 10), (), F(10))
    assert partition_function(inst) == 10


def test_all_rejecting_counts_exactly():
    # Every vertex rejects an occupied edge: only the empty set survives.
    inst = weighted_instance(
        "ab", [("a", "b")], {"a": (1, 0), "b": (1, 0)}
    )
    est = approx_partition_function(inst, F(1, 10))
    assert est.value == 1 and est.per_edge_ratios == ()
    assert partition_function(inst) == 1


def test_epsilon_clamp():
    inst = path_instance(2, 1)
    est = approx_partition_function(inst, F(3))
    assert est.epsilon == EPS_CLAMP == F(6, 25)
    assert_sandwich(est, partition_function(inst))


def test_counting_rejections():
    inst = path_instance(2, 1)
    with pytest.raises(InstanceInvalid):
        approx_partition_function(inst, F(0))
    with pytest.raises(InstanceInvalid):
        approx_partition_function(inst, F(-1, 10))
    with pytest.raises(InstanceInvalid):
        approx_partition_function(halfedge_path_instance(), F(1, 10))
    bad = weighted_instance("ab", [("a", "b")], {"a": (0, 1), "b": (1, 1)})
    with pytest.raises(InstanceInvalid):
        approx_partition_function(bad, F(1, 10))


def test_count_estimate_recomposition_guard():
    ratio = RatioEstimate(F(1, 2), F(1, 10), ell=1, rounds=1)
    good = CountEstimate(F(3, 2), F(1, 10), (ratio,), F(1))
    assert good.value == F(3, 2)
    with pytest.raises(InternalError):
        CountEstimate(F(2), F(1, 10), (ratio,), F(1))


# -------------------------------------------------------------- front doors


def test_count_matchings_frozen_graphs():
    k3 = build_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    est = count_b_matchings(k3, 1, F(3, 20))
    assert_sandwich(est, 4)
    est = count_b_matchings(k3, 2, F(3, 20))
    assert_sandwich(est, 8)

    p4 = build_graph("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    est = count_b_matchings(p4, 1, F(6, 25))
    assert_sandwich(est, 5)


def test_count_matchings_per_vertex_b():
    star = build_graph("cxyz", [("c", "x"), ("c", "y"), ("c", "z")])
    est = count_b_matchings(star, {"c": 2, "x": 1, "y": 1, "z": 1}, F(3, 20))
    assert_sandwich(est, 7)  # empty, 3 singles, 3 pairs
    with pytest.raises(InvalidB):
        count_b_matchings(star, {"c": 2}, F(3, 20))
    with pytest.raises(InvalidB):
        count_b_matchings(star, 0, F(3, 20))


def test_count_covers_triangle():
    k3 = build_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    # Covers with >= 1 edge at each vertex: all eight subsets except the
    # empty set, the three singletons, and none of the pairs miss — exact
    # count is 4 (three pairs + the full triangle).
    est = count_b_edge_covers(k3, 1, F(3, 20))
    assert_sandwich(est, 4)
    # b = 0 accepts every subset.
    est = count_b_edge_covers(k3, 0, F(3, 20))
    assert_sandwich(est, 8)


def test_count_covers_path_forced_edges():
    # On the 2-edge path, degree-1 endpoints with b = 1 force both edges:
    # the complement instance is edgeless and the count is exactly 1.
    p3 = build_graph("abc", [("a", "b"), ("b", "c")])
    est = count_b_edge_covers(p3, 1, F(3, 20))
    assert est.value == 1
    assert est.per_edge_ratios == ()


def test_count_covers_validation():
    k3 = build_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.raises(InvalidB):
        count_b_edge_covers(k3, 3, F(3, 20))  # deg = 2 everywhere
    with pytest.raises(InvalidB):
        count_b_edge_covers(k3, -1, F(3, 20))
    with pytest.raises(InvalidB):
        count_b_edge_covers(k3, {"a": 1}, F(3, 20))


def test_front_doors_reject_half_edges():
    g = build_graph("ab", [("a", "b")], ["a"])
    with pytest.raises(InstanceInvalid):
        count_b_matchings(g, 1, F(1, 10))
    with pytest.raises(InstanceInvalid):
        count_b_edge_covers(g, 1, F(1, 10))


def test_covers_match_exact_complement_count():
    # Cross-check the complementation route against direct enumeration on
    # a small non-regular graph.
    g = build_graph("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("b", "d")])
    demands = {"a": 1, "b": 1, "c": 2, "d": 1}
    exact = 0
    edges = g.normal_edges
    for mask in range(2 ** len(edges)):
        chosen = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        degs = {v: 0 for v in g.vertices}
        for u, w in chosen:
            degs[u] += 1
            degs[w] += 1
        if all(degs[v] >= demands[v] for v in g.vertices):
            exact += 1
    est = count_b_edge_covers(g, demands, F(3, 20))
    assert_sandwich(est, exact)
