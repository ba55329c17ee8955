"""Shared instance builders for the test suite.

Builders only — expected values are frozen as literals inside the tests
that assert them, next to the assertion.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from holcount import (
    HolantInstance,
    PartialAssignment,
    atmost_signature,
    build_graph,
    signature,
)

DATA = Path(__file__).parent / "data"


def atmost_instance(vertices, edges, half_edges=(), b=1) -> HolantInstance:
    """Every vertex constrained to at most b occupied incident edges."""

    g = build_graph(vertices, edges, half_edges)
    sigs = {v: atmost_signature(b, g.degree(v)) for v in vertices}
    return HolantInstance(g, sigs)


def weighted_instance(vertices, edges, sig_values, half_edges=()) -> HolantInstance:
    g = build_graph(vertices, edges, half_edges)
    sigs = {v: signature([Fraction(x) for x in values]) for v, values in sig_values.items()}
    return HolantInstance(g, sigs)


def path_instance(k: int, b: int = 1) -> HolantInstance:
    """A path with k edges, all vertices at-most-b."""

    vertices = [f"v{i}" for i in range(k + 1)]
    edges = [(f"v{i}", f"v{i+1}") for i in range(k)]
    return atmost_instance(vertices, edges, b=b)


def cycle_instance(k: int, b: int = 1) -> HolantInstance:
    vertices = [f"v{i}" for i in range(k)]
    edges = [(f"v{i}", f"v{(i+1) % k}") for i in range(k)]
    return atmost_instance(vertices, edges, b=b)


def triangle_instance(b: int = 1) -> HolantInstance:
    return cycle_instance(3, b=b)


def star_instance(leaves: int = 3, b: int = 1) -> HolantInstance:
    vertices = ["c"] + [f"l{i}" for i in range(leaves)]
    edges = [("c", f"l{i}") for i in range(leaves)]
    return atmost_instance(vertices, edges, b=b)


def single_halfedge_instance(values=(1, 1)) -> HolantInstance:
    """One vertex with one half-edge and an explicit signature."""

    g = build_graph(("a",), (), ("a",))
    return HolantInstance(g, {"a": signature([Fraction(x) for x in values])})


def single_edge_instance() -> HolantInstance:
    return atmost_instance("ab", [("a", "b")])


def halfedge_path_instance() -> HolantInstance:
    """Path a-b-c-d with a half-edge at a, all at-most-1 (4 edges total)."""

    return atmost_instance("abcd", [("a", "b"), ("b", "c"), ("c", "d")], ["a"])


def halfedge_triangle_instance() -> HolantInstance:
    return atmost_instance("abc", [("a", "b"), ("b", "c"), ("c", "a")], ["a"])


def halfedge_cycle4_instance() -> HolantInstance:
    return atmost_instance(
        "abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], ["a"]
    )


def degenerate_halfedge_instance() -> HolantInstance:
    """Half-edge anchor rejects occupation on one incident edge pattern.

    Vertex b caps at one occupied edge, so pinning the half-edge to 1
    makes one side-extension of the first tree node infeasible — the
    degenerate child-group case.
    """

    g = build_graph("ab", [("a", "b")], ["b"])
    return HolantInstance(
        g,
        {
            "a": signature([1, 1]),
            "b": atmost_signature(1, 2),
        },
    )


def amenability_violation_instance() -> HolantInstance:
    from holcount import loads_instance

    return loads_instance((DATA / "amenability_violation.json").read_text())


def halfedge_fixtures() -> list[tuple[str, HolantInstance]]:
    """Every test fixture carrying a half-edge, by name."""

    return [
        ("single-halfedge", single_halfedge_instance()),
        ("halved-halfedge", single_halfedge_instance((1, Fraction(1, 2)))),
        ("halfedge-path", halfedge_path_instance()),
        ("halfedge-triangle", halfedge_triangle_instance()),
        ("halfedge-cycle4", halfedge_cycle4_instance()),
        ("degenerate-halfedge", degenerate_halfedge_instance()),
        ("amenability-violation", amenability_violation_instance()),
    ]


def root_pins(instance: HolantInstance):
    """(sigma, tau, anchor, e_bot) for an instance with one half-edge."""

    g = instance.graph
    e_bot = len(g.normal_edges)
    (anchor,) = g.half_edges[0]
    return PartialAssignment({e_bot: 1}), PartialAssignment({e_bot: 0}), anchor, e_bot


def document(instance: HolantInstance) -> str:
    from holcount import dump_instance

    return dump_instance(instance)


def load_json(name: str) -> dict:
    return json.loads((DATA / name).read_text())
