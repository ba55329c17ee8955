"""Partition-function approximation by telescoping edge pinning.

Writing Z as the all-zero weight times a product of per-edge factors
(1 + R_i), where R_i is the marginal ratio of the first remaining edge
after the earlier edges were pinned to 0, reduces counting to a chain
of ratio estimations.  Estimating each ratio within (1 +/- eps/(2m))
lands the product within (1 +/- eps) of Z.

The front doors build instances whose partition functions count
b-matchings (at-most-b signatures) and b-edge-covers (complemented into
a b'-matching instance, with edges forced by b' = 0 vertices removed up
front).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import InstanceInvalid, InternalError, InvalidB
from .estimator import RatioEstimate, estimate_edge_ratio
from .graphs import Graph, build_graph
from .instances import (
    HolantInstance,
    atmost_signature,
    compute_B,
    pin,
    r_max,
    validate_instance,
)
from .tree import DEFAULT_MAX_TREE_NODES

ONE = Fraction(1)
EPS_CLAMP = Fraction(6, 25)


@dataclass(frozen=True)
class CountEstimate:
    """An approximate partition function with its exact composition.

    ``value`` equals ``base`` times the product of (1 + ratio.value)
    over ``per_edge_ratios``, exactly as composed; ``epsilon`` is the
    effective tolerance after the internal clamp, and the guarantee is
    (1 - epsilon) Z <= value <= (1 + epsilon) Z.
    """

    value: Fraction
    epsilon: Fraction
    per_edge_ratios: tuple[RatioEstimate, ...]
    base: Fraction

    def __post_init__(self) -> None:
        recomposed = self.base
        for ratio in self.per_edge_ratios:
            recomposed *= ONE + ratio.value
        if recomposed != self.value:
            raise InternalError("count estimate does not recompose from its factors")


def approx_partition_function(
    instance: HolantInstance,
    eps: Fraction,
    *,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
) -> CountEstimate:
    """Estimate Z within a (1 +/- eps) factor, deterministically.

    The tolerance is clamped to min(eps, 6/25) internally; the clamped
    value is what the estimate reports and guarantees.  Instances whose
    signatures all reject a single occupied edge (f_v(1) = 0 everywhere)
    have exactly one feasible assignment and are answered exactly.

    Raises:
        InstanceInvalid: the instance fails validation, eps is not
            positive, or the graph carries half-edges.
    """

    eps = Fraction(eps)
    if eps <= 0:
        raise InstanceInvalid(f"eps must be positive, got {eps}")
    report = validate_instance(instance)
    if not report.ok:
        first = report.first
        raise InstanceInvalid(f"{first.rule} at vertex {first.vertex!r}")
    if instance.graph.half_edges:
        raise InstanceInvalid("counting requires a graph without half-edges")

    eps_eff = min(eps, EPS_CLAMP)
    base = ONE
    for v in instance.graph.vertices:
        base *= instance.signature_of(v)(0)

    m = len(instance.graph.normal_edges)
    if m == 0 or r_max(instance) == 0:
        return CountEstimate(base, eps_eff, (), base)

    per_edge = eps_eff / (2 * m)
    ratios: list[RatioEstimate] = []
    current = instance
    floor = compute_B(current)
    value = base
    for _ in range(m):
        estimate = estimate_edge_ratio(
            current, 0, per_edge, max_tree_nodes=max_tree_nodes
        )
        ratios.append(estimate)
        value *= ONE + estimate.value
        current = pin(current, 0, 0)
        lifted = compute_B(current)
        if lifted < floor:
            raise InternalError("marginal floor decreased along the pinning chain")
        floor = lifted
    return CountEstimate(value, eps_eff, tuple(ratios), base)


def _per_vertex(graph: Graph, b: int | Mapping[str, int], what: str) -> dict[str, int]:
    if isinstance(b, int):
        return {v: b for v in graph.vertices}
    table = dict(b)
    missing = [v for v in graph.vertices if v not in table]
    if missing:
        raise InvalidB(f"no {what} given for vertices {missing}")
    return {v: int(table[v]) for v in graph.vertices}


def count_b_matchings(
    graph: Graph,
    b: int | Mapping[str, int],
    eps: Fraction,
    *,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
) -> CountEstimate:
    """Approximately count edge subsets with at most b_v edges at each v.

    Raises:
        InvalidB: some b_v < 1 (use the cover front door for b_v = 0
            semantics), or b omits a vertex.
        InstanceInvalid: the graph carries half-edges.
    """

    if graph.half_edges:
        raise InstanceInvalid("b-matchings are counted on graphs without half-edges")
    caps = _per_vertex(graph, b, "bound")
    bad = {v: c for v, c in caps.items() if c < 1}
    if bad:
        raise InvalidB(f"b must be >= 1 everywhere, got {bad}")
    signatures = {v: atmost_signature(caps[v], graph.degree(v)) for v in graph.vertices}
    return approx_partition_function(
        HolantInstance(graph, signatures), eps, max_tree_nodes=max_tree_nodes
    )


def count_b_edge_covers(
    graph: Graph,
    b: int | Mapping[str, int],
    eps: Fraction,
    *,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
) -> CountEstimate:
    """Approximately count edge subsets with at least b_v edges at each v.

    Complementation: S covers iff its complement is a b'-matching for
    b'_v = deg(v) - b_v.  Vertices with b'_v = 0 force all their edges
    into every cover; those edges are removed up front and the matching
    count runs on the residual graph.

    Raises:
        InvalidB: some b_v is negative or exceeds deg(v), or b omits a
            vertex.
        InstanceInvalid: the graph carries half-edges.
    """

    if graph.half_edges:
        raise InstanceInvalid("b-edge-covers are counted on graphs without half-edges")
    demands = _per_vertex(graph, b, "demand")
    bad = {v: c for v, c in demands.items() if c < 0 or c > graph.degree(v)}
    if bad:
        raise InvalidB(f"b must satisfy 0 <= b_v <= deg(v), got {bad}")
    complement = {v: graph.degree(v) - demands[v] for v in graph.vertices}
    forced = {v for v, c in complement.items() if c == 0}
    residual_edges = [
        (u, w) for u, w in graph.normal_edges if u not in forced and w not in forced
    ]
    residual = build_graph(graph.vertices, residual_edges)
    signatures = {
        v: atmost_signature(complement[v], residual.degree(v)) for v in residual.vertices
    }
    return approx_partition_function(
        HolantInstance(residual, signatures), eps, max_tree_nodes=max_tree_nodes
    )
