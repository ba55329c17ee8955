"""Oracle-backed invariant suite for a single instance.

Runs every cross-module identity the package relies on against one
loaded instance, using the brute-force oracle as the source of truth,
and reports one result per check: ``pass`` / ``fail`` with a detail
string, ``info`` for observations that are expected and harmless (such
as individual edges failing the amenability comparison while some
amenable edge still exists), and ``skipped`` when the instance lacks
the needed shape (e.g. coupling checks without a half-edge).

Everything here is exact rational arithmetic; a ``fail`` means a real
identity violation, never a tolerance artifact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .instances import (
    HolantInstance,
    PartialAssignment,
    compute_B,
    is_feasible_partial,
    pin,
    r_max,
    split_instance,
    unassigned_incident,
    validate_instance,
)
from .lp import build_lp, check_feasible, point_from_table, violated_constraints
from .oracle import (
    DEFAULT_MAX_ORACLE_EDGES,
    MarginalQuery,
    amenable_edge_scan,
    conditional_marginal,
    conditional_partition_function,
    exact_tree_probabilities,
    marginal_ratio_exact,
    partition_function,
)
from .tree import DEFAULT_MAX_TREE_NODES, build_tree, descendant_set_D

PASS = "pass"
FAIL = "fail"
INFO = "info"
SKIPPED = "skipped"

ZERO = Fraction(0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str


def verify_instance(
    instance: HolantInstance,
    *,
    ell: int = 2,
    max_oracle_edges: int = DEFAULT_MAX_ORACLE_EDGES,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
) -> list[CheckResult]:
    """Run the whole suite; results come back in a fixed order.

    Raises:
        TooLarge: the instance exceeds the oracle edge cap.
        BudgetExceeded: the coupling tree outgrew its node budget.
    """

    results: list[CheckResult] = []

    report = validate_instance(instance)
    if report.ok:
        results.append(CheckResult("instance-valid", PASS, "all signature invariants hold"))
    else:
        first = report.first
        results.append(
            CheckResult(
                "instance-valid", FAIL, f"{first.rule} at vertex {first.vertex!r}: {first.detail}"
            )
        )
        # Everything downstream assumes validity.
        return results

    results.append(_check_pinning_additivity(instance, max_oracle_edges))
    results.append(_check_pinning_monotonicity(instance))
    results.append(_check_marginal_floor(instance, max_oracle_edges))
    results.append(_check_halfedge_ratio_bound(instance, max_oracle_edges))
    results.extend(
        _coupling_checks(instance, ell, max_oracle_edges, max_tree_nodes)
    )
    results.append(_check_edge_split_factorization(instance, max_oracle_edges))
    return results


def _check_pinning_additivity(instance: HolantInstance, cap: int) -> CheckResult:
    """Z = Z[e<-0] + Z[e<-1], and pinning matches conditioning, per edge."""

    z = partition_function(instance, max_edges=cap)
    for e in range(instance.graph.num_edges):
        parts = []
        for c in (0, 1):
            restricted = conditional_partition_function(
                instance, PartialAssignment({e: c}), max_edges=cap
            )
            pinned = partition_function(pin(instance, e, c), max_edges=cap)
            if restricted != pinned:
                return CheckResult(
                    "pinning-additivity",
                    FAIL,
                    f"edge {e} value {c}: conditional {restricted} != pinned {pinned}",
                )
            parts.append(restricted)
        if parts[0] + parts[1] != z:
            return CheckResult(
                "pinning-additivity", FAIL, f"edge {e}: {parts[0]} + {parts[1]} != {z}"
            )
    return CheckResult(
        "pinning-additivity", PASS, f"holds for all {instance.graph.num_edges} edges"
    )


def _check_pinning_monotonicity(instance: HolantInstance) -> CheckResult:
    """Pinning never raises r_max and never lowers the marginal floor B."""

    base_r = r_max(instance)
    base_b = compute_B(instance)
    tried = 0
    for e in range(instance.graph.num_edges):
        endpoints = instance.graph.endpoints(e)
        for c in (0, 1):
            if any(instance.signature_of(v)(c) == 0 for v in endpoints):
                continue  # the pinned instance would be invalid; out of scope
            smaller = pin(instance, e, c)
            tried += 1
            if r_max(smaller) > base_r:
                return CheckResult(
                    "pinning-monotonicity",
                    FAIL,
                    f"edge {e} value {c}: r_max rose {base_r} -> {r_max(smaller)}",
                )
            if compute_B(smaller) < base_b:
                return CheckResult(
                    "pinning-monotonicity",
                    FAIL,
                    f"edge {e} value {c}: B fell {base_b} -> {compute_B(smaller)}",
                )
    return CheckResult("pinning-monotonicity", PASS, f"holds for {tried} valid pinnings")


def _check_marginal_floor(instance: HolantInstance, cap: int) -> CheckResult:
    """Pr[all unassigned edges at v take 0 | sigma] >= B for sampled sigma."""

    floor = compute_B(instance)
    conditions = [PartialAssignment()]
    for e in range(instance.graph.num_edges):
        for c in (0, 1):
            sigma = PartialAssignment({e: c})
            if is_feasible_partial(instance, sigma):
                conditions.append(sigma)
    checked = 0
    for sigma in conditions:
        for v in instance.graph.vertices:
            frontier = [ref.index for ref in unassigned_incident(instance, sigma, v)]
            if not frontier:
                continue
            query = MarginalQuery(
                condition=sigma,
                target_edges=tuple(frontier),
                target_values=tuple(0 for _ in frontier),
            )
            mass = conditional_marginal(instance, query, max_edges=cap)
            checked += 1
            if mass < floor:
                return CheckResult(
                    "marginal-floor",
                    FAIL,
                    f"vertex {v!r} under {dict(sigma.items)}: {mass} < B = {floor}",
                )
    return CheckResult("marginal-floor", PASS, f"B = {floor} respected in {checked} cases")


def _check_halfedge_ratio_bound(instance: HolantInstance, cap: int) -> CheckResult:
    """Half-edge marginal ratios never exceed r_max."""

    g = instance.graph
    if not g.half_edges:
        return CheckResult("halfedge-ratio-bound", SKIPPED, "instance has no half-edge")
    ceiling = r_max(instance)
    details = []
    for k in range(len(g.half_edges)):
        e = len(g.normal_edges) + k
        ratio = marginal_ratio_exact(instance, e, max_edges=cap)
        if ratio > ceiling:
            return CheckResult(
                "halfedge-ratio-bound", FAIL, f"edge {e}: R = {ratio} > r_max = {ceiling}"
            )
        details.append(f"R(e{e}) = {ratio}")
    return CheckResult(
        "halfedge-ratio-bound", PASS, "; ".join(details) + f" <= r_max = {ceiling}"
    )


def _coupling_root(instance: HolantInstance):
    """(sigma, tau, anchor, e_bot) when the instance is a coupling root, else None."""

    g = instance.graph
    if len(g.half_edges) != 1:
        return None
    e_bot = len(g.normal_edges)
    (anchor,) = g.half_edges[0]
    if instance.signature_of(anchor)(1) == 0:
        return None
    return PartialAssignment({e_bot: 1}), PartialAssignment({e_bot: 0}), anchor, e_bot


def _coupling_checks(
    instance: HolantInstance, ell: int, cap: int, max_tree_nodes: int
) -> list[CheckResult]:
    names = (
        "amenability-scan",
        "tree-invariants",
        "tree-probability-identities",
        "lp-feasible-at-oracle-ratio",
    )
    root = _coupling_root(instance)
    if root is None:
        why = (
            "needs exactly one half-edge whose anchor accepts an occupied edge"
        )
        return [CheckResult(name, SKIPPED, why) for name in names]
    sigma, tau, anchor, e_bot = root
    tree = build_tree(instance, sigma, tau, anchor, ell, max_nodes=max_tree_nodes)
    out = [
        _check_amenability(instance, tree, cap),
        _check_tree_invariants(instance, tree),
        _check_table_identities(instance, tree, cap),
        _check_lp_at_oracle_ratio(instance, tree, e_bot, cap),
    ]
    return out


def _check_amenability(instance: HolantInstance, tree, cap: int) -> CheckResult:
    """Some amenable edge exists at every internal feasible node.

    Individual edges may fail the marginal comparison; those are reported
    in the detail but only a node with no amenable edge at all is a failure.
    """

    violations = []
    for node in tree.nodes:
        if node.leaf or not node.feasible:
            continue
        scan = amenable_edge_scan(
            instance, node.label.sigma, node.label.tau, node.label.v, max_edges=cap
        )
        for row in scan.rows:
            if not row.acceptable:
                relation = ">=" if scan.sigma_lighter else "<="
                violations.append(
                    f"node {node.id}: edge {row.edge} not amenable "
                    f"(mu_sigma(1) = {row.mu_sigma_one} {relation} mu_tau(1) = {row.mu_tau_one} "
                    f"is required but fails)"
                )
        if scan.chosen is None:
            return CheckResult(
                "amenability-scan",
                FAIL,
                f"node {node.id} at vertex {node.label.v!r} has no amenable edge",
            )
    if violations:
        return CheckResult(
            "amenability-scan",
            INFO,
            "amenable edge exists everywhere; non-amenable edges observed: "
            + " | ".join(violations),
        )
    return CheckResult("amenability-scan", PASS, "every scanned edge is amenable")


def _check_tree_invariants(instance: HolantInstance, tree) -> CheckResult:
    """Structural sanity of the coupling tree at this depth."""

    for node in tree.nodes:
        ham_gap = abs(node.ham_sigma - node.ham_tau)
        if node.feasible and ham_gap != 1:
            return CheckResult(
                "tree-invariants", FAIL, f"node {node.id}: Hamming gap {ham_gap} != 1"
            )
        should_be_leaf = (
            node.label.L >= tree.ell or not node.frontier or not node.feasible
        )
        if node.leaf != should_be_leaf:
            return CheckResult(
                "tree-invariants", FAIL, f"node {node.id}: leaf flag inconsistent"
            )
        if node.leaf:
            if node.children:
                return CheckResult(
                    "tree-invariants", FAIL, f"leaf {node.id} has children"
                )
            continue
        if len(node.children) != 3 * len(node.frontier):
            return CheckResult(
                "tree-invariants",
                FAIL,
                f"node {node.id}: {len(node.children)} children for "
                f"{len(node.frontier)} frontier edges",
            )
        for e, (both0, disc, both1) in node.children_by_edge.items():
            lab0 = tree.node(both0).label
            lab_d = tree.node(disc).label
            lab1 = tree.node(both1).label
            if lab0.sigma.value(e) != 0 or lab0.tau.value(e) != 0 or lab0.L != node.label.L:
                return CheckResult(
                    "tree-invariants", FAIL, f"node {node.id} edge {e}: coupled-0 child wrong"
                )
            if lab1.sigma.value(e) != 1 or lab1.tau.value(e) != 1 or lab1.L != node.label.L:
                return CheckResult(
                    "tree-invariants", FAIL, f"node {node.id} edge {e}: coupled-1 child wrong"
                )
            if lab_d.L != node.label.L + 1 or lab_d.sigma.value(e) == lab_d.tau.value(e):
                return CheckResult(
                    "tree-invariants", FAIL, f"node {node.id} edge {e}: discrepant child wrong"
                )
        members = descendant_set_D(tree, node.id)
        for m in members:
            member = tree.node(m)
            if not (member.good_leaf and member.feasible):
                return CheckResult(
                    "tree-invariants",
                    FAIL,
                    f"node {node.id}: zero-extension member {m} is not a feasible good leaf",
                )
            if member.label.L != node.label.L or member.label.v != node.label.v:
                return CheckResult(
                    "tree-invariants",
                    FAIL,
                    f"node {node.id}: zero-extension member {m} changed (L, v)",
                )
        # Exactly one member per order of this node's frontier descends from
        # it; convergent sibling branches may contribute further members.
        descended = sum(1 for m in members if _descends_from(tree, m, node.id))
        if descended != factorial(len(node.frontier)):
            return CheckResult(
                "tree-invariants",
                FAIL,
                f"node {node.id}: {descended} zero-extension descendants, "
                f"expected {factorial(len(node.frontier))}",
            )
    return CheckResult("tree-invariants", PASS, f"{len(tree.nodes)} nodes consistent")


def _descends_from(tree, node_id: int, ancestor: int) -> bool:
    cur: int | None = node_id
    while cur is not None:
        if cur == ancestor:
            return True
        cur = tree.node(cur).parent
    return False


def _check_table_identities(instance: HolantInstance, tree, cap: int) -> CheckResult:
    """Exact visit-probability identities on the built tree."""

    table = exact_tree_probabilities(instance, tree, max_edges=cap)
    if table.p_sigma[0] != 1 or table.p_tau[0] != 1:
        return CheckResult(
            "tree-probability-identities", FAIL, "root values are not 1"
        )
    B = compute_B(instance)
    for node in tree.nodes:
        if node.leaf or not node.feasible:
            continue
        u = node.id
        for pmap, emap, side in (
            (table.p_sigma, table.edge_sigma, "sigma"),
            (table.p_tau, table.edge_tau, "tau"),
        ):
            total = sum((emap[(u, e)] for e in node.frontier), ZERO)
            if pmap[u] != total:
                return CheckResult(
                    "tree-probability-identities",
                    FAIL,
                    f"node {u} {side}: edge masses sum to {total}, node carries {pmap[u]}",
                )
            members = descendant_set_D(tree, u)
            mass = sum((pmap[m] for m in members), ZERO)
            if mass < B * pmap[u]:
                return CheckResult(
                    "tree-probability-identities",
                    FAIL,
                    f"node {u} {side}: zero-extension mass {mass} < B * {pmap[u]}",
                )
        for e in node.frontier:
            both0, disc, both1 = node.children_by_edge[e]
            if node.ham_sigma < node.ham_tau:
                groups = {
                    "sigma": {0: (both0,), 1: (disc, both1)},
                    "tau": {0: (both0, disc), 1: (both1,)},
                }
            else:
                groups = {
                    "sigma": {0: (both0, disc), 1: (both1,)},
                    "tau": {0: (both0,), 1: (disc, both1)},
                }
            for side, pmap, emap in (
                ("sigma", table.p_sigma, table.edge_sigma),
                ("tau", table.p_tau, table.edge_tau),
            ):
                partial = getattr(node.label, side)
                for value in (0, 1):
                    group_sum = sum((pmap[k] for k in groups[side][value]), ZERO)
                    if is_feasible_partial(instance, partial.assign(e, value)):
                        if group_sum != emap[(u, e)]:
                            return CheckResult(
                                "tree-probability-identities",
                                FAIL,
                                f"node {u} edge {e} {side} value {value}: group sum "
                                f"{group_sum} != edge mass {emap[(u, e)]}",
                            )
                    elif group_sum != 0:
                        return CheckResult(
                            "tree-probability-identities",
                            FAIL,
                            f"node {u} edge {e} {side} value {value}: infeasible group "
                            f"carries mass {group_sum}",
                        )
    return CheckResult(
        "tree-probability-identities", PASS, f"all identities hold on {len(tree.nodes)} nodes"
    )


def _check_lp_at_oracle_ratio(
    instance: HolantInstance, tree, e_bot: int, cap: int
) -> CheckResult:
    ratio = marginal_ratio_exact(instance, e_bot, max_edges=cap)
    B = compute_B(instance)
    problem = build_lp(tree, instance, ratio, ratio, B)
    table = exact_tree_probabilities(instance, tree, max_edges=cap)
    bad = violated_constraints(problem, point_from_table(problem, table))
    if bad:
        return CheckResult(
            "lp-feasible-at-oracle-ratio",
            FAIL,
            f"exact table violates constraints {bad[:5]} at r- = r+ = {ratio}",
        )
    if not check_feasible(problem):
        return CheckResult(
            "lp-feasible-at-oracle-ratio", FAIL, f"solver reports infeasible at R = {ratio}"
        )
    return CheckResult(
        "lp-feasible-at-oracle-ratio",
        PASS,
        f"feasible at r- = r+ = {ratio} and the exact table is a witness",
    )


def _check_edge_split_factorization(instance: HolantInstance, cap: int) -> CheckResult:
    g = instance.graph
    if not g.normal_edges:
        return CheckResult("edge-split-factorization", SKIPPED, "no normal edges")
    checked = 0
    for e in range(len(g.normal_edges)):
        u, v = g.endpoints(e)
        if instance.signature_of(u)(1) == 0 or instance.signature_of(v)(1) == 0:
            whole = conditional_partition_function(
                instance, PartialAssignment({e: 1}), max_edges=cap
            )
            if whole != 0:
                return CheckResult(
                    "edge-split-factorization",
                    FAIL,
                    f"edge {e}: endpoint rejects occupation yet Z[e<-1] = {whole}",
                )
            continue
        _, phi1, phi2 = split_instance(instance, e)
        # In each sub-instance the surviving stub is the newest half-edge,
        # which sits at the last edge index.
        left = marginal_ratio_exact(instance, e, max_edges=cap)
        right = marginal_ratio_exact(
            phi1, phi1.graph.num_edges - 1, max_edges=cap
        ) * marginal_ratio_exact(phi2, phi2.graph.num_edges - 1, max_edges=cap)
        if left != right:
            return CheckResult(
                "edge-split-factorization", FAIL, f"edge {e}: {left} != {right}"
            )
        checked += 1
    return CheckResult(
        "edge-split-factorization", PASS, f"exact on {checked} splittable edges"
    )
