"""Graph construction, indexing, and edge surgery."""

import pytest

from holcount import (
    DuplicateEdge,
    EdgeRef,
    Graph,
    NotANormalEdge,
    UnknownEdge,
    UnknownVertex,
    build_graph,
    incident_edges,
    remove_edge,
    split_edge,
)
from holcount.graphs import HALF, NORMAL


def test_build_graph_orders_normal_edges_before_half_edges():
    g = build_graph("abc", [("a", "b"), ("b", "c")], ["c", "a"])
    assert g.vertices == ("a", "b", "c")
    assert g.normal_edges == (("a", "b"), ("b", "c"))
    assert g.half_edges == (("c",), ("a",))
    assert g.num_edges == 4
    assert g.endpoints(0) == ("a", "b")
    assert g.endpoints(2) == ("c",)
    assert g.edge_ref(1) == EdgeRef(1, NORMAL)
    assert g.edge_ref(3) == EdgeRef(3, HALF)
    assert [e.kind for e in g.all_edges()] == [NORMAL, NORMAL, HALF, HALF]


def test_degree_counts_both_edge_kinds():
    g = build_graph("abc", [("a", "b"), ("b", "c")], ["a", "a"])
    assert g.degree("a") == 3
    assert g.degree("b") == 2
    assert g.degree("c") == 1
    assert g.max_degree() == 3
    assert build_graph("x").max_degree() == 0


def test_degree_sum_counts_each_normal_edge_twice():
    g = build_graph("abcd", [("a", "b"), ("b", "c"), ("c", "d")], ["d"])
    total = sum(g.degree(v) for v in g.vertices)
    assert total == 2 * len(g.normal_edges) + len(g.half_edges)


def test_unknown_vertex_rejected():
    with pytest.raises(UnknownVertex):
        build_graph("ab", [("a", "z")])
    with pytest.raises(UnknownVertex):
        build_graph("ab", [], ["z"])
    g = build_graph("ab", [("a", "b")])
    with pytest.raises(UnknownVertex):
        g.degree("z")
    with pytest.raises(UnknownVertex):
        incident_edges(g, "z")


def test_duplicate_and_degenerate_edges_rejected():
    with pytest.raises(DuplicateEdge):
        build_graph("aab")
    with pytest.raises(DuplicateEdge):
        build_graph("ab", [("a", "b"), ("b", "a")])
    with pytest.raises(DuplicateEdge):
        build_graph("ab", [("a", "a")])


def test_edge_index_out_of_range():
    g = build_graph("ab", [("a", "b")])
    with pytest.raises(UnknownEdge):
        g.edge_ref(1)
    with pytest.raises(UnknownEdge):
        g.endpoints(-1)
    with pytest.raises(UnknownEdge):
        remove_edge(g, 5)


def test_incident_edges_sorted_by_global_index():
    g = build_graph("abc", [("a", "b"), ("b", "c"), ("a", "c")], ["b"])
    refs = incident_edges(g, "b")
    assert [r.index for r in refs] == [0, 1, 3]
    assert [r.kind for r in refs] == [NORMAL, NORMAL, HALF]
    assert len(refs) == g.degree("b")


def test_split_edge_appends_stubs_in_endpoint_order():
    g = build_graph("abc", [("a", "b"), ("b", "c")], ["c"])
    g2 = split_edge(g, EdgeRef(0, NORMAL))
    assert g2.normal_edges == (("b", "c"),)
    assert g2.half_edges == (("c",), ("a",), ("b",))
    assert g2.num_edges == g.num_edges + 1
    for v in g.vertices:
        assert g2.degree(v) == g.degree(v)


def test_split_edge_requires_normal_edge():
    g = build_graph("ab", [("a", "b")], ["a"])
    with pytest.raises(NotANormalEdge):
        split_edge(g, EdgeRef(1, HALF))


def test_remove_edge_preserves_relative_order():
    g = build_graph("abcd", [("a", "b"), ("b", "c"), ("c", "d")], ["a", "d"])
    assert remove_edge(g, 1).normal_edges == (("a", "b"), ("c", "d"))
    assert remove_edge(g, 3).half_edges == (("d",),)
    assert remove_edge(g, 4).half_edges == (("a",),)


def test_graph_is_immutable():
    g = build_graph("ab", [("a", "b")])
    with pytest.raises(AttributeError):
        g.vertices = ()
    assert isinstance(g, Graph)
