"""Graphs with normal edges and half-edges.

A graph here is a finite vertex list plus two ordered edge lists: normal
edges (unordered pairs of distinct vertices) and half-edges (single-vertex
stubs).  Every edge has a stable global index: normal edges come first in
construction order, then half-edges.  That fixed total order is relied on
throughout the package — enumeration order, tree child order and LP variable
order are all derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DuplicateEdge, NotANormalEdge, UnknownEdge, UnknownVertex

NORMAL = "normal"
HALF = "half"


@dataclass(frozen=True)
class EdgeRef:
    """Reference to an edge: its position in the combined edge list and kind."""

    index: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in (NORMAL, HALF):
            raise ValueError(f"bad edge kind: {self.kind!r}")


@dataclass(frozen=True)
class Graph:
    """Immutable graph with half-edges.

    Attributes:
        vertices: vertex ids in declaration order.
        normal_edges: unordered pairs, stored in input order.
        half_edges: single-vertex tuples, stored in input order.
    """

    vertices: tuple[str, ...]
    normal_edges: tuple[tuple[str, str], ...]
    half_edges: tuple[tuple[str], ...]

    @property
    def num_edges(self) -> int:
        return len(self.normal_edges) + len(self.half_edges)

    def edge_ref(self, index: int) -> EdgeRef:
        """The EdgeRef for a global edge index."""
        if 0 <= index < len(self.normal_edges):
            return EdgeRef(index, NORMAL)
        if len(self.normal_edges) <= index < self.num_edges:
            return EdgeRef(index, HALF)
        raise UnknownEdge(f"edge index {index} out of range")

    def all_edges(self) -> list[EdgeRef]:
        """All edges in global order (normal first, then half)."""
        return [self.edge_ref(i) for i in range(self.num_edges)]

    def endpoints(self, e: EdgeRef | int) -> tuple[str, ...]:
        """Endpoints of an edge: a pair for normal edges, a 1-tuple for half-edges."""
        index = e.index if isinstance(e, EdgeRef) else e
        if 0 <= index < len(self.normal_edges):
            return self.normal_edges[index]
        if len(self.normal_edges) <= index < self.num_edges:
            return self.half_edges[index - len(self.normal_edges)]
        raise UnknownEdge(f"edge index {index} out of range")

    def degree(self, v: str) -> int:
        if v not in self.vertices:
            raise UnknownVertex(f"unknown vertex {v!r}")
        deg = sum(1 for pair in self.normal_edges if v in pair)
        deg += sum(1 for (w,) in self.half_edges if w == v)
        return deg

    def max_degree(self) -> int:
        return max((self.degree(v) for v in self.vertices), default=0)


def build_graph(
    vertices: Iterable[str],
    normal_edges: Iterable[Sequence[str]] = (),
    half_edges: Iterable[Sequence[str]] = (),
) -> Graph:
    """Build a graph with stable edge indices in input order.

    Args:
        vertices: vertex ids (strings).
        normal_edges: pairs (u, v) of distinct declared vertices.
        half_edges: singletons (v,) of declared vertices.

    Raises:
        UnknownVertex: an endpoint is not a declared vertex.
        DuplicateEdge: a repeated vertex id, a repeated normal edge
            (in either orientation) or a self-loop.
    """
    vs = tuple(vertices)
    seen_v = set()
    for v in vs:
        if v in seen_v:
            raise DuplicateEdge(f"vertex {v!r} declared twice")
        seen_v.add(v)

    normals: list[tuple[str, str]] = []
    seen_pairs: set[frozenset[str]] = set()
    for pair in normal_edges:
        u, v = pair
        if u not in seen_v:
            raise UnknownVertex(f"unknown vertex {u!r} in edge {tuple(pair)!r}")
        if v not in seen_v:
            raise UnknownVertex(f"unknown vertex {v!r} in edge {tuple(pair)!r}")
        if u == v:
            raise DuplicateEdge(f"self-loop at {u!r} not allowed")
        key = frozenset((u, v))
        if key in seen_pairs:
            raise DuplicateEdge(f"parallel edge {tuple(pair)!r} not allowed")
        seen_pairs.add(key)
        normals.append((u, v))

    halves: list[tuple[str]] = []
    for stub in half_edges:
        (v,) = tuple(stub)
        if v not in seen_v:
            raise UnknownVertex(f"unknown vertex {v!r} in half-edge")
        halves.append((v,))

    return Graph(vs, tuple(normals), tuple(halves))


def incident_edges(g: Graph, v: str) -> list[EdgeRef]:
    """All edges containing v, sorted by global edge index.

    The length equals deg(v); half-edges at v come after all normal edges
    because of the global order.
    """
    if v not in g.vertices:
        raise UnknownVertex(f"unknown vertex {v!r}")
    out: list[EdgeRef] = []
    for i, pair in enumerate(g.normal_edges):
        if v in pair:
            out.append(EdgeRef(i, NORMAL))
    base = len(g.normal_edges)
    for j, (w,) in enumerate(g.half_edges):
        if w == v:
            out.append(EdgeRef(base + j, HALF))
    return out


def split_edge(g: Graph, e: EdgeRef) -> Graph:
    """Replace normal edge e = {u, v} by two half-edges {u} and {v}.

    The half-edges are appended at the end of the global order, u's stub
    before v's, so the result is reproducible.  Every vertex degree is
    preserved and the edge count grows by one.

    Raises:
        NotANormalEdge: e is not a normal edge of g.
    """
    if e.kind != NORMAL or not (0 <= e.index < len(g.normal_edges)):
        raise NotANormalEdge(f"edge {e} is not a normal edge of this graph")
    u, v = g.normal_edges[e.index]
    normals = g.normal_edges[: e.index] + g.normal_edges[e.index + 1 :]
    halves = g.half_edges + ((u,), (v,))
    return Graph(g.vertices, normals, halves)


def remove_edge(g: Graph, e: EdgeRef | int) -> Graph:
    """Graph with edge e deleted (relative order of the rest preserved)."""
    index = e.index if isinstance(e, EdgeRef) else e
    n1 = len(g.normal_edges)
    if 0 <= index < n1:
        return Graph(g.vertices, g.normal_edges[:index] + g.normal_edges[index + 1 :], g.half_edges)
    if n1 <= index < g.num_edges:
        j = index - n1
        return Graph(g.vertices, g.normal_edges, g.half_edges[:j] + g.half_edges[j + 1 :])
    raise UnknownEdge(f"edge index {index} out of range")
