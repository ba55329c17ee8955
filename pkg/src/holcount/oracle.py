"""Exact brute-force ground truth.

Everything here is exact rational arithmetic over explicit enumeration of the
2^|E| assignments, capped at a configurable edge count (default 24).  The
module answers four kinds of questions: partition functions, conditional
marginals, per-node probabilities of the coupling process over a finished
coupling tree, and seeded Monte Carlo runs of the coupling itself.  It is the
independent reference implementation the rest of the package is tested
against, so nothing in here may call the tree-LP machinery.

Enumeration is lexicographic over the global edge order (value 0 before 1,
lower-indexed edges most significant), so every golden value derived from
this module is reproducible bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import (
    ConditionViolated,
    InfeasibleCondition,
    InternalError,
    TooLarge,
)
from .graphs import EdgeRef
from .instances import (
    HolantInstance,
    PartialAssignment,
    hamming_at,
    unassigned_incident,
)
from .tree import CouplingTree, coupling_root_violation

DEFAULT_MAX_ORACLE_EDGES = 24


def _edge_index(e: EdgeRef | int) -> int:
    return e.index if isinstance(e, EdgeRef) else int(e)


@dataclass(frozen=True)
class MarginalQuery:
    """A conditional marginal query: Pr[target edges take target values | condition]."""

    condition: PartialAssignment
    target_edges: tuple[int, ...]
    target_values: tuple[int, ...]

    def __post_init__(self) -> None:
        edges = tuple(_edge_index(e) for e in self.target_edges)
        values = tuple(int(v) for v in self.target_values)
        if len(edges) != len(values):
            raise ValueError("target_edges and target_values differ in length")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate target edge")
        if any(v not in (0, 1) for v in values):
            raise ValueError("target values must be 0 or 1")
        for e in edges:
            if self.condition.value(e) is not None:
                raise ValueError(f"target edge {e} is already assigned by the condition")
        object.__setattr__(self, "target_edges", edges)
        object.__setattr__(self, "target_values", values)


@dataclass(frozen=True)
class TreeProbabilityTable:
    """Exact per-node and per-(node, edge) probabilities of the coupling process.

    ``p_sigma[u]`` / ``p_tau[u]`` are the visit probability of node u divided
    by the conditional weight of u's sigma / tau assignment; ``edge_sigma`` and
    ``edge_tau`` carry the per-edge split (mass sits entirely on the one edge
    the process would expand at u, zero elsewhere).  ``path_probability`` is
    the raw visit probability itself and ``chosen_edge`` the expanded edge,
    kept for diagnostics.
    """

    p_sigma: dict[int, Fraction]
    p_tau: dict[int, Fraction]
    edge_sigma: dict[tuple[int, int], Fraction]
    edge_tau: dict[tuple[int, int], Fraction]
    path_probability: dict[int, Fraction]
    chosen_edge: dict[int, int | None]


class _Enumerator:
    """Cached restricted partition sums for one instance."""

    def __init__(self, instance: HolantInstance, max_edges: int) -> None:
        m = instance.graph.num_edges
        if m > max_edges:
            raise TooLarge(f"instance has {m} edges, above the oracle cap {max_edges}")
        self.instance = instance
        g = instance.graph
        self._edge_count = m
        self._incidence = {
            v: tuple(
                i for i in range(m) if v in g.endpoints(i)
            )
            for v in g.vertices
        }
        self._signatures = {v: instance.signature_of(v) for v in g.vertices}
        self._cache: dict[PartialAssignment, Fraction] = {}

    def restricted_z(self, condition: PartialAssignment) -> Fraction:
        """Total weight of full assignments extending the condition."""
        hit = self._cache.get(condition)
        if hit is not None:
            return hit
        free = [i for i in range(self._edge_count) if condition.value(i) is None]
        fixed = dict(condition.items)
        total = Fraction(0)
        for bits in product((0, 1), repeat=len(free)):
            values = fixed | dict(zip(free, bits))
            weight = Fraction(1)
            for v, incident in self._incidence.items():
                weight *= self._signatures[v](sum(values[i] for i in incident))
                if weight == 0:
                    break
            total += weight
        self._cache[condition] = total
        return total

    def mu(self, condition: PartialAssignment, edge: int, value: int) -> Fraction:
        """Conditional marginal of one edge; the condition must be feasible."""
        z = self.restricted_z(condition)
        if z == 0:
            raise InfeasibleCondition(f"condition {condition!r} has zero weight")
        return self.restricted_z(condition.assign(edge, value)) / z


def assignment_weight(instance: HolantInstance, assignment: PartialAssignment) -> Fraction:
    """Weight of one full assignment: the product of f_v(Ham(sigma, E_v))."""
    if len(assignment) != instance.graph.num_edges:
        raise ValueError("assignment_weight requires a full assignment")
    weight = Fraction(1)
    for v in instance.graph.vertices:
        weight *= instance.signature_of(v)(hamming_at(instance, assignment, v))
    return weight


def partition_function(
    instance: HolantInstance, *, max_edges: int = DEFAULT_MAX_ORACLE_EDGES
) -> Fraction:
    """Exact Z by enumeration.  Raises TooLarge above the edge cap."""
    return _Enumerator(instance, max_edges).restricted_z(PartialAssignment())


def conditional_partition_function(
    instance: HolantInstance,
    condition: PartialAssignment,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> Fraction:
    """Exact total weight of the assignments extending a partial one."""
    return _Enumerator(instance, max_edges).restricted_z(condition)


def conditional_marginal(
    instance: HolantInstance,
    query: MarginalQuery,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> Fraction:
    """Pr[targets = values | condition] under the Gibbs distribution.

    Raises:
        InfeasibleCondition: the conditioning event has zero weight.
        TooLarge: the instance is above the oracle edge cap.
    """
    en = _Enumerator(instance, max_edges)
    z = en.restricted_z(query.condition)
    if z == 0:
        raise InfeasibleCondition(f"condition {query.condition!r} has zero weight")
    extended = query.condition
    for e, c in zip(query.target_edges, query.target_values):
        extended = extended.assign(e, c)
    return en.restricted_z(extended) / z


def marginal_ratio_exact(
    instance: HolantInstance,
    e: EdgeRef | int,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> Fraction:
    """The marginal ratio of an edge: Z restricted to e=1 over Z restricted to e=0."""
    en = _Enumerator(instance, max_edges)
    index = _edge_index(e)
    z0 = en.restricted_z(PartialAssignment({index: 0}))
    if z0 == 0:
        raise InfeasibleCondition(f"edge {index} cannot take value 0 with positive weight")
    return en.restricted_z(PartialAssignment({index: 1})) / z0


@dataclass(frozen=True)
class AmenabilityRow:
    """One scanned edge: both conditional marginals and whether it qualifies."""

    edge: int
    mu_sigma_one: Fraction
    mu_tau_one: Fraction
    acceptable: bool


@dataclass(frozen=True)
class AmenabilityScan:
    """Full scan of a state's unassigned incident edges, in global order."""

    sigma_lighter: bool
    rows: tuple[AmenabilityRow, ...]
    chosen: int | None  # first acceptable edge, None if the scan came up empty


def _acceptable(sigma_lighter: bool, mu_s: Fraction, mu_t: Fraction) -> bool:
    # The side with the smaller Hamming weight at v must have the larger
    # marginal for the coupled step to stochastically dominate.
    return mu_s >= mu_t if sigma_lighter else mu_s <= mu_t


def _first_amenable(
    en: _Enumerator,
    sigma: PartialAssignment,
    tau: PartialAssignment,
    frontier: tuple[int, ...],
    sigma_lighter: bool,
) -> tuple[int, Fraction, Fraction] | None:
    for e in frontier:
        mu_s = en.mu(sigma, e, 1)
        mu_t = en.mu(tau, e, 1)
        if _acceptable(sigma_lighter, mu_s, mu_t):
            return e, mu_s, mu_t
    return None


def amenable_edge_scan(
    instance: HolantInstance,
    sigma: PartialAssignment,
    tau: PartialAssignment,
    v: str,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> AmenabilityScan:
    """Evaluate every unassigned edge at v for amenability (no early exit).

    Used for verification and reporting; the process itself stops at the
    first acceptable edge.
    """
    en = _Enumerator(instance, max_edges)
    ham_s = hamming_at(instance, sigma, v)
    ham_t = hamming_at(instance, tau, v)
    if ham_s == ham_t:
        raise ValueError(f"vertex {v!r} has equal Hamming weights under sigma and tau")
    sigma_lighter = ham_s < ham_t
    rows = []
    for ref in unassigned_incident(instance, sigma, v):
        mu_s = en.mu(sigma, ref.index, 1)
        mu_t = en.mu(tau, ref.index, 1)
        rows.append(
            AmenabilityRow(ref.index, mu_s, mu_t, _acceptable(sigma_lighter, mu_s, mu_t))
        )
    chosen = next((row.edge for row in rows if row.acceptable), None)
    return AmenabilityScan(sigma_lighter=sigma_lighter, rows=tuple(rows), chosen=chosen)


def exact_tree_probabilities(
    instance: HolantInstance,
    tree: CouplingTree,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> TreeProbabilityTable:
    """Visit probabilities of the coupling process for every tree node, exactly.

    Forward recursion from the root: at each reachable internal node the
    process expands the first amenable unassigned edge at v, splitting its
    visit probability across the three children by the optimal-coupling
    masses.  Node values divide the visit probability by the conditional
    weight of that node's assignment; infeasible nodes get 0 outright.
    """
    en = _Enumerator(instance, max_edges)
    root = tree.root
    z_sigma_root = en.restricted_z(root.label.sigma)
    z_tau_root = en.restricted_z(root.label.tau)
    if z_sigma_root == 0 or z_tau_root == 0:
        raise InternalError("coupling tree root has zero conditional weight")

    p_sigma: dict[int, Fraction] = {}
    p_tau: dict[int, Fraction] = {}
    edge_sigma: dict[tuple[int, int], Fraction] = {}
    edge_tau: dict[tuple[int, int], Fraction] = {}
    path: dict[int, Fraction] = {root.id: Fraction(1)}
    chosen: dict[int, int | None] = {}

    for node in tree.nodes:  # ids are breadth-first, so parents come first
        u = node.id
        reach = path.get(u, Fraction(0))
        if not node.feasible:
            p_sigma[u] = Fraction(0)
            p_tau[u] = Fraction(0)
            continue
        z_s = en.restricted_z(node.label.sigma)
        z_t = en.restricted_z(node.label.tau)
        if z_s == 0 or z_t == 0:
            raise InternalError(f"feasible node {u} has zero conditional weight")
        p_sigma[u] = reach * z_sigma_root / z_s
        p_tau[u] = reach * z_tau_root / z_t
        if node.leaf:
            continue
        for e in node.frontier:
            edge_sigma[(u, e)] = Fraction(0)
            edge_tau[(u, e)] = Fraction(0)
        if reach == 0:
            chosen[u] = None
            continue
        found = _first_amenable(
            en, node.label.sigma, node.label.tau, node.frontier, node.ham_sigma < node.ham_tau
        )
        if found is None:
            raise InternalError(f"no amenable edge at reachable node {u}")
        e_star, mu_s, mu_t = found
        chosen[u] = e_star
        if node.ham_sigma < node.ham_tau:
            mass_both0 = 1 - mu_s
            mass_both1 = mu_t
            mass_split = mu_s - mu_t
        else:
            mass_both0 = 1 - mu_t
            mass_both1 = mu_s
            mass_split = mu_t - mu_s
        child0, child_split, child1 = node.children_by_edge[e_star]
        path[child0] = reach * mass_both0
        path[child_split] = reach * mass_split
        path[child1] = reach * mass_both1
        edge_sigma[(u, e_star)] = p_sigma[u]
        edge_tau[(u, e_star)] = p_tau[u]

    if p_sigma[root.id] != 1 or p_tau[root.id] != 1:
        raise InternalError("root probabilities must both be 1")
    return TreeProbabilityTable(
        p_sigma=p_sigma,
        p_tau=p_tau,
        edge_sigma=edge_sigma,
        edge_tau=edge_tau,
        path_probability=path,
        chosen_edge=chosen,
    )


def simulate_couple(
    instance: HolantInstance,
    sigma: PartialAssignment,
    tau: PartialAssignment,
    v: str,
    seed: int,
    *,
    max_edges: int = DEFAULT_MAX_ORACLE_EDGES,
) -> tuple[PartialAssignment, PartialAssignment]:
    """One seeded run of the coupling process, returning both full assignments.

    Each stochastic step consumes exactly one uniform draw from
    ``random.Random(seed)``.  While the pair is discrepant at a vertex, the
    first amenable unassigned edge there is sampled from the optimal coupling
    of the two conditional marginals, with the unit interval carved as
    [coupled-0 | coupled-1 | discrepant]; a discrepant outcome hands the
    discrepancy to the edge's other endpoint.  Once no unassigned edge is
    incident to the discrepant vertex the two conditional distributions
    coincide, and the remaining edges are sampled in global order from the
    shared marginal, identically on both sides.

    Raises:
        ConditionViolated: (instance, sigma, tau, v) is not a valid coupling root.
        TooLarge: the instance is above the oracle edge cap.
    """
    reason = coupling_root_violation(instance, sigma, tau, v)
    if reason is not None:
        raise ConditionViolated(reason)
    en = _Enumerator(instance, max_edges)
    rng = random.Random(seed)
    g = instance.graph

    cur_sigma, cur_tau, cur_v = sigma, tau, v
    while True:
        frontier = tuple(e.index for e in unassigned_incident(instance, cur_sigma, cur_v))
        if not frontier:
            break
        ham_s = hamming_at(instance, cur_sigma, cur_v)
        ham_t = hamming_at(instance, cur_tau, cur_v)
        sigma_lighter = ham_s < ham_t
        found = _first_amenable(en, cur_sigma, cur_tau, frontier, sigma_lighter)
        if found is None:
            raise InternalError(f"no amenable edge at vertex {cur_v!r}")
        e_star, mu_s, mu_t = found
        if sigma_lighter:
            mass_both0 = 1 - mu_s
            mass_both1 = mu_t
            split_values = (1, 0)
        else:
            mass_both0 = 1 - mu_t
            mass_both1 = mu_s
            split_values = (0, 1)
        draw = rng.random()  # compared against exact rationals; Python does this exactly
        if draw < mass_both0:
            cur_sigma = cur_sigma.assign(e_star, 0)
            cur_tau = cur_tau.assign(e_star, 0)
        elif draw < mass_both0 + mass_both1:
            cur_sigma = cur_sigma.assign(e_star, 1)
            cur_tau = cur_tau.assign(e_star, 1)
        else:
            cur_sigma = cur_sigma.assign(e_star, split_values[0])
            cur_tau = cur_tau.assign(e_star, split_values[1])
            endpoints = g.endpoints(e_star)
            cur_v = endpoints[0] if endpoints[1] == cur_v else endpoints[1]

    # Coupled phase: both conditional distributions agree from here on.
    for e in range(g.num_edges):
        if cur_sigma.value(e) is not None:
            continue
        mu_one = en.mu(cur_sigma, e, 1)
        draw = rng.random()
        value = 1 if draw < mu_one else 0
        cur_sigma = cur_sigma.assign(e, value)
        cur_tau = cur_tau.assign(e, value)
    return cur_sigma, cur_tau
