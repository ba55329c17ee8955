"""The truncated extended coupling tree.

Nodes are labeled (sigma, tau, s, v, L): a pair of partial assignments on the
same edges, the ordered sequence s of assigned normal edges, the vertex v at
which the two assignments' Hamming weights differ by exactly one, and the
number L of discrepancies accumulated so far.  Construction is breadth-first
and purely combinatorial — no marginals are consulted, which is what lets the
LP built on top of this tree avoid the exact oracle entirely.

A node is a leaf when its discrepancy budget is exhausted (L >= ell), when v
has no unassigned incident edges, or when either assignment is infeasible.
Otherwise, for *every* unassigned edge e = {v, v'} at v, three children are
added (including states the underlying random process would never visit):
the coupled-0 child, the discrepant child (handed to v' with L+1), and the
coupled-1 child, in that order.  Edges are expanded in global order, so the
whole tree — and everything derived from it — is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BudgetExceeded,
    ConditionViolated,
    DomainError,
    InternalError,
    NotInternalFeasible,
    PreconditionViolated,
)
from .graphs import HALF, Graph
from .instances import (
    HolantInstance,
    PartialAssignment,
    hamming_at,
    is_feasible_partial,
    unassigned_incident,
    validate_instance,
)

PATTERN_BOTH0 = 0
PATTERN_DISCREPANT = 1
PATTERN_BOTH1 = 2

DEFAULT_MAX_TREE_NODES = 2_000_000


@dataclass(frozen=True)
class NodeLabel:
    """(sigma, tau, s, v, L) — see the module docstring."""

    sigma: PartialAssignment
    tau: PartialAssignment
    s: tuple[int, ...]
    v: str
    L: int


@dataclass
class TreeNode:
    id: int
    parent: int | None
    label: NodeLabel
    depth: int
    feasible: bool
    leaf: bool
    good_leaf: bool
    bad_leaf: bool
    ham_sigma: int
    ham_tau: int
    frontier: tuple[int, ...]  # E_v^sigma as global edge indices
    via_edge: int | None = None
    pattern: int | None = None
    children: list[int] = field(default_factory=list)
    children_by_edge: dict[int, tuple[int, int, int]] = field(default_factory=dict)


@dataclass
class CouplingTree:
    """The finished tree plus the parameters it was built under."""

    nodes: list[TreeNode]
    ell: int
    graph: Graph
    e_bot: int
    v_bot: str

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)


def coupling_root_violation(
    instance: HolantInstance,
    sigma: PartialAssignment,
    tau: PartialAssignment,
    v: str,
) -> str | None:
    """Why (instance, sigma, tau, v) is not a valid coupling root, or None.

    A valid root needs a valid instance with a unique half-edge anchored at
    v, sigma pinning that half-edge to 1, tau pinning it to 0, and both pins
    feasible (so both conditional distributions exist).
    """
    report = validate_instance(instance)
    if not report.ok:
        first = report.first
        return f"instance invalid: {first.rule} at vertex {first.vertex!r}"
    g = instance.graph
    if len(g.half_edges) != 1:
        return f"expected a unique half-edge, found {len(g.half_edges)}"
    e_bot = len(g.normal_edges)
    (anchor,) = g.half_edges[0]
    if anchor != v:
        return f"half-edge is anchored at {anchor!r}, not at {v!r}"
    if sigma.items != ((e_bot, 1),):
        return "sigma must assign exactly the half-edge to 1"
    if tau.items != ((e_bot, 0),):
        return "tau must assign exactly the half-edge to 0"
    if not is_feasible_partial(instance, sigma):
        return "sigma root is infeasible (f(1) = 0 at the anchor vertex)"
    if not is_feasible_partial(instance, tau):
        return "tau root is infeasible"
    return None


def build_tree(
    instance: HolantInstance,
    sigma: PartialAssignment,
    tau: PartialAssignment,
    v: str,
    ell: int,
    *,
    max_nodes: int = DEFAULT_MAX_TREE_NODES,
) -> CouplingTree:
    """Breadth-first construction of the ell-truncated extended coupling tree.

    Args:
        instance: a valid instance with a unique half-edge anchored at v.
        sigma: the half-edge pinned to 1.
        tau: the half-edge pinned to 0.
        v: the anchor vertex.
        ell: discrepancy budget, at least 1.
        max_nodes: abort with BudgetExceeded beyond this many nodes.

    Raises:
        ConditionViolated: the tuple is not a valid coupling root.
        DomainError: ell < 1.
        BudgetExceeded: the node budget was exhausted.
    """
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    reason = coupling_root_violation(instance, sigma, tau, v)
    if reason is not None:
        raise ConditionViolated(reason)

    g = instance.graph
    delta = g.max_degree()
    n_normal = len(g.normal_edges)
    depth_cap = min(delta * ell, n_normal)

    nodes: list[TreeNode] = []
    seen_labels: set[NodeLabel] = set()

    def add_node(label: NodeLabel, parent: int | None, depth: int, via: int | None, pattern: int | None) -> int:
        if len(nodes) >= max_nodes:
            raise BudgetExceeded(
                f"coupling tree exceeded {max_nodes} nodes "
                f"(max degree {delta}, ell {ell}, {g.num_edges} edges)"
            )
        if label in seen_labels:
            raise InternalError(f"duplicate tree label at depth {depth}: {label}")
        seen_labels.add(label)
        feasible = is_feasible_partial(instance, label.sigma) and is_feasible_partial(instance, label.tau)
        ham_s = hamming_at(instance, label.sigma, label.v)
        ham_t = hamming_at(instance, label.tau, label.v)
        if abs(ham_s - ham_t) != 1:
            raise InternalError(f"node vertex {label.v!r} is not weight-distinct: {ham_s} vs {ham_t}")
        frontier = tuple(e.index for e in unassigned_incident(instance, label.sigma, label.v))
        is_leaf = (not feasible) or label.L >= ell or not frontier
        node = TreeNode(
            id=len(nodes),
            parent=parent,
            label=label,
            depth=depth,
            feasible=feasible,
            leaf=is_leaf,
            good_leaf=is_leaf and label.L < ell,
            bad_leaf=is_leaf and label.L >= ell,
            ham_sigma=ham_s,
            ham_tau=ham_t,
            frontier=frontier,
            via_edge=via,
            pattern=pattern,
        )
        if depth > depth_cap:
            raise InternalError(f"tree depth {depth} exceeds bound {depth_cap}")
        if len(label.sigma) != len(label.tau) or len(label.sigma) > delta * ell + 1:
            raise InternalError(f"assigned-edge count {len(label.sigma)} exceeds bound {delta * ell + 1}")
        nodes.append(node)
        return node.id

    root_label = NodeLabel(sigma, tau, (), v, 0)
    queue = deque([add_node(root_label, None, 0, None, None)])
    while queue:
        nid = queue.popleft()
        node = nodes[nid]
        if node.leaf:
            continue
        lab = node.label
        for e in node.frontier:
            endpoints = g.endpoints(e)
            if len(endpoints) != 2:
                raise InternalError(f"frontier edge {e} is a half-edge; the anchor pin should cover it")
            other = endpoints[0] if endpoints[1] == lab.v else endpoints[1]
            s2 = lab.s + (e,)
            if node.ham_sigma < node.ham_tau:
                triple = (
                    NodeLabel(lab.sigma.assign(e, 0), lab.tau.assign(e, 0), s2, lab.v, lab.L),
                    NodeLabel(lab.sigma.assign(e, 1), lab.tau.assign(e, 0), s2, other, lab.L + 1),
                    NodeLabel(lab.sigma.assign(e, 1), lab.tau.assign(e, 1), s2, lab.v, lab.L),
                )
            else:
                triple = (
                    NodeLabel(lab.sigma.assign(e, 0), lab.tau.assign(e, 0), s2, lab.v, lab.L),
                    NodeLabel(lab.sigma.assign(e, 0), lab.tau.assign(e, 1), s2, other, lab.L + 1),
                    NodeLabel(lab.sigma.assign(e, 1), lab.tau.assign(e, 1), s2, lab.v, lab.L),
                )
            ids = tuple(
                add_node(child, nid, node.depth + 1, e, pattern)
                for pattern, child in enumerate(triple)
            )
            node.children.extend(ids)
            node.children_by_edge[e] = ids
            queue.extend(ids)
        if len(node.children) > 3 * delta:
            raise InternalError(f"node {nid} has {len(node.children)} children, above 3*Delta = {3 * delta}")

    return CouplingTree(nodes=nodes, ell=ell, graph=g, e_bot=len(g.normal_edges), v_bot=v)


@dataclass(frozen=True)
class NodeSets:
    feasible: frozenset[int]
    leaves: frozenset[int]
    good_leaves: frozenset[int]
    bad_leaves: frozenset[int]


def classify_nodes(tree: CouplingTree) -> NodeSets:
    """Node sets: feasible nodes, leaves, good leaves (L < ell), bad leaves.

    Also asserts that every internal node is feasible (infeasible nodes are
    leaves by construction).
    """
    feasible = frozenset(n.id for n in tree.nodes if n.feasible)
    leaves = frozenset(n.id for n in tree.nodes if n.leaf)
    good = frozenset(n.id for n in tree.nodes if n.good_leaf)
    bad = frozenset(n.id for n in tree.nodes if n.bad_leaf)
    internal = frozenset(n.id for n in tree.nodes) - leaves
    if not internal <= feasible:
        raise InternalError("internal node found infeasible")
    return NodeSets(feasible=feasible, leaves=leaves, good_leaves=good, bad_leaves=bad)


def descendant_set_D(tree: CouplingTree, node_id: int) -> list[int]:
    """The nodes whose assignments extend this node's by zeros on its frontier.

    Members share the input's weight-distinct vertex and discrepancy count;
    there is one per assignment order of the frontier that survives in the
    tree.  Guaranteed nonempty for internal feasible nodes.

    Raises:
        NotInternalFeasible: the node is a leaf or infeasible.
    """
    node = tree.node(node_id)
    if node.leaf or not node.feasible:
        raise NotInternalFeasible(f"node {node_id} is not an internal feasible node")
    target_sigma = node.label.sigma
    target_tau = node.label.tau
    for e in node.frontier:
        target_sigma = target_sigma.assign(e, 0)
        target_tau = target_tau.assign(e, 0)
    members = [
        n.id
        for n in tree.nodes
        if n.label.sigma == target_sigma and n.label.tau == target_tau
    ]
    if not members:
        raise InternalError(f"empty descendant set at node {node_id}")
    return members


def good_leaf_weight_ratio(instance: HolantInstance, node: TreeNode) -> Fraction:
    """f_v(Ham(tau, E_v)) / f_v(Ham(sigma, E_v)) at a feasible good leaf.

    Equals the ratio of the two conditional weights mu(tau)/mu(sigma) there;
    the denominator is positive by feasibility.
    """
    if not (node.good_leaf and node.feasible):
        raise PreconditionViolated(f"node {node.id} is not a feasible good leaf")
    f = instance.signature_of(node.label.v)
    return f(node.ham_tau) / f(node.ham_sigma)
