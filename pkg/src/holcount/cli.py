"""Command-line driver: counting, ratio estimation, oracle cross-checks,
tree and LP inspection, and an oracle-backed verification mode.

All results are printed as JSON with sorted keys; exact rationals are
rendered as "p/q" strings in lowest terms, with decimal convenience
fields alongside (never authoritative).  Exit codes: 0 success, 2 input
parse failure, 3 validation/domain failure, 4 budget exhaustion, 5
internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

from .counting import approx_partition_function
from .errors import (
    BudgetExceeded,
    ConditionViolated,
    DomainError,
    DuplicateEdge,
    HolcountError,
    InfeasibleCondition,
    InstanceInvalid,
    InternalError,
    InvalidB,
    InvalidBracket,
    NotANormalEdge,
    NotInternalFeasible,
    ParseError,
    PreconditionViolated,
    TooLarge,
    UnknownEdge,
    UnknownVertex,
    ValidationError,
)
from .estimator import RatioEstimate, estimate_edge_ratio, estimate_halfedge_ratio
from .instances import HolantInstance, PartialAssignment, compute_B
from .io import format_rational, load_instance
from .lp import build_lp, solve
from .oracle import (
    DEFAULT_MAX_ORACLE_EDGES,
    MarginalQuery,
    conditional_marginal,
    marginal_ratio_exact,
    partition_function,
)
from .tree import (
    DEFAULT_MAX_TREE_NODES,
    PATTERN_BOTH0,
    PATTERN_BOTH1,
    PATTERN_DISCREPANT,
    build_tree,
    classify_nodes,
)
from .verify import verify_instance

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_INTERNAL = 5

_VALIDATION_ERRORS = (
    ValidationError,
    InstanceInvalid,
    InvalidB,
    DomainError,
    ConditionViolated,
    InvalidBracket,
    InfeasibleCondition,
    UnknownEdge,
    UnknownVertex,
    NotANormalEdge,
    DuplicateEdge,
    PreconditionViolated,
    NotInternalFeasible,
    ValueError,
)
_BUDGET_ERRORS = (BudgetExceeded, TooLarge)

_PATTERN_NAMES = {
    PATTERN_BOTH0: "both0",
    PATTERN_DISCREPANT: "discrepant",
    PATTERN_BOTH1: "both1",
}


def _fraction_arg(text: str) -> Fraction:
    """Accept "3/20", "0.15", or "2" on the command line."""

    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _given_arg(text: str) -> tuple[int, int]:
    edge, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected EDGE=VALUE, got {text!r}")
    try:
        return int(edge), int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from exc


def _decimal(value: Fraction) -> float | None:
    try:
        return float(value)
    except OverflowError:
        return None


def _emit(payload: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _ratio_payload(edge: int, estimate: RatioEstimate) -> dict[str, Any]:
    return {
        "edge": edge,
        "rhat": format_rational(estimate.value),
        "rhat_decimal": _decimal(estimate.value),
        "epsilon": format_rational(estimate.epsilon),
        "ell": estimate.ell,
        "rounds": estimate.rounds,
        "lp_nodes": estimate.tree_nodes,
    }


def _unique_halfedge(instance: HolantInstance, requested: int | None) -> int:
    g = instance.graph
    if not g.half_edges:
        raise ConditionViolated("instance has no half-edge")
    first = len(g.normal_edges)
    if requested is None:
        if len(g.half_edges) > 1:
            raise ConditionViolated(
                "instance has several half-edges; pick one with --halfedge"
            )
        return first
    if not first <= requested < g.num_edges:
        raise NotANormalEdge(f"edge {requested} is not a half-edge of this instance")
    return requested


def _coupling_tree(instance: HolantInstance, e_bot: int, ell: int, max_nodes: int):
    (anchor,) = instance.graph.half_edges[e_bot - len(instance.graph.normal_edges)]
    sigma = PartialAssignment({e_bot: 1})
    tau = PartialAssignment({e_bot: 0})
    return build_tree(instance, sigma, tau, anchor, ell, max_nodes=max_nodes)


def _cmd_count(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    estimate = approx_partition_function(
        instance, args.epsilon, max_tree_nodes=args.max_tree_nodes
    )
    per_edge = []
    for edge, ratio in enumerate(estimate.per_edge_ratios):
        entry = _ratio_payload(edge, ratio)
        entry.pop("rhat_decimal")
        per_edge.append(entry)
    _emit(
        {
            "zhat": format_rational(estimate.value),
            "zhat_decimal": _decimal(estimate.value),
            "epsilon": format_rational(estimate.epsilon),
            "m": len(instance.graph.normal_edges),
            "per_edge": per_edge,
        }
    )
    return EXIT_OK


def _cmd_ratio(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    if args.edge >= len(instance.graph.normal_edges):
        estimate = estimate_halfedge_ratio(
            instance, args.edge, args.epsilon, max_tree_nodes=args.max_tree_nodes
        )
    else:
        estimate = estimate_edge_ratio(
            instance, args.edge, args.epsilon, max_tree_nodes=args.max_tree_nodes
        )
    _emit(_ratio_payload(args.edge, estimate))
    return EXIT_OK


def _cmd_oracle_count(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    z = partition_function(instance, max_edges=args.max_oracle_edges)
    _emit(
        {
            "z": format_rational(z),
            "z_decimal": _decimal(z),
            "m": instance.graph.num_edges,
        }
    )
    return EXIT_OK


def _cmd_oracle_ratio(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    ratio = marginal_ratio_exact(instance, args.edge, max_edges=args.max_oracle_edges)
    _emit(
        {
            "edge": args.edge,
            "r": format_rational(ratio),
            "r_decimal": _decimal(ratio),
        }
    )
    return EXIT_OK


def _cmd_oracle_marginal(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    condition = PartialAssignment(dict(args.given))
    query = MarginalQuery(
        condition=condition,
        target_edges=(args.edge,),
        target_values=(args.value,),
    )
    mass = conditional_marginal(instance, query, max_edges=args.max_oracle_edges)
    _emit(
        {
            "edge": args.edge,
            "value": args.value,
            "given": {str(e): c for e, c in args.given},
            "probability": format_rational(mass),
            "probability_decimal": _decimal(mass),
        }
    )
    return EXIT_OK


def _assignment_json(assignment: PartialAssignment) -> dict[str, int]:
    return {str(e): c for e, c in assignment.items}


def _cmd_tree(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    e_bot = _unique_halfedge(instance, args.halfedge)
    tree = _coupling_tree(instance, e_bot, args.ell, args.max_tree_nodes)
    sets = classify_nodes(tree)
    payload: dict[str, Any] = {
        "nodes": len(tree.nodes),
        "feasible": len(sets.feasible),
        "leaves": len(sets.leaves),
        "good_leaves": len(sets.good_leaves),
        "bad_leaves": len(sets.bad_leaves),
        "ell": tree.ell,
        "e_bot": tree.e_bot,
        "v_bot": tree.v_bot,
    }
    if args.dump:
        records = []
        for node in tree.nodes:
            records.append(
                {
                    "id": node.id,
                    "parent": node.parent,
                    "via_edge": node.via_edge,
                    "pattern": None if node.pattern is None else _PATTERN_NAMES[node.pattern],
                    "depth": node.depth,
                    "L": node.label.L,
                    "v": node.label.v,
                    "s": list(node.label.s),
                    "feasible": node.feasible,
                    "leaf": node.leaf,
                    "good_leaf": node.good_leaf,
                    "bad_leaf": node.bad_leaf,
                    "ham_sigma": node.ham_sigma,
                    "ham_tau": node.ham_tau,
                    "frontier": list(node.frontier),
                    "sigma": _assignment_json(node.label.sigma),
                    "tau": _assignment_json(node.label.tau),
                }
            )
        payload["node_list"] = records
    _emit(payload)
    return EXIT_OK


def _cmd_lp_check(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    e_bot = _unique_halfedge(instance, args.halfedge)
    tree = _coupling_tree(instance, e_bot, args.ell, args.max_tree_nodes)
    problem = build_lp(tree, instance, args.rminus, args.rplus, compute_B(instance))
    result = solve(problem)
    payload: dict[str, Any] = {
        "feasible": result.feasible,
        "ell": args.ell,
        "r_minus": format_rational(args.rminus),
        "r_plus": format_rational(args.rplus),
        "variables": len(problem.variables),
        "constraints": len(problem.constraints),
        "families": {str(k): v for k, v in problem.family_counts.items()},
    }
    if args.dump:
        payload["lp"] = problem.dump().splitlines()
    _emit(payload)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    checks = verify_instance(
        instance,
        ell=args.ell,
        max_oracle_edges=args.max_oracle_edges,
        max_tree_nodes=args.max_tree_nodes,
    )
    ok = all(check.status != "fail" for check in checks)
    _emit(
        {
            "ok": ok,
            "checks": [
                {"name": c.name, "status": c.status, "detail": c.detail} for c in checks
            ],
        }
    )
    return EXIT_OK if ok else EXIT_VALIDATION


def _add_instance_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--instance",
        default="-",
        help="path to an instance document, or - for stdin (default)",
    )


def _add_tree_budget(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--max-tree-nodes",
        type=int,
        default=DEFAULT_MAX_TREE_NODES,
        help=f"coupling-tree node budget (default {DEFAULT_MAX_TREE_NODES})",
    )


def _add_oracle_budget(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--max-oracle-edges",
        type=int,
        default=DEFAULT_MAX_ORACLE_EDGES,
        help=f"edge cap for brute-force enumeration (default {DEFAULT_MAX_ORACLE_EDGES})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holcount",
        description="Deterministic approximate counting for log-concave Holant instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_count = sub.add_parser("count", help="approximate the partition function")
    _add_instance_arg(p_count)
    p_count.add_argument("--epsilon", type=_fraction_arg, required=True)
    _add_tree_budget(p_count)
    p_count.set_defaults(func=_cmd_count)

    p_ratio = sub.add_parser("ratio", help="estimate one edge's marginal ratio")
    _add_instance_arg(p_ratio)
    p_ratio.add_argument("--edge", type=int, required=True)
    p_ratio.add_argument("--epsilon", type=_fraction_arg, required=True)
    _add_tree_budget(p_ratio)
    p_ratio.set_defaults(func=_cmd_ratio)

    p_oracle = sub.add_parser("oracle", help="exact brute-force reference values")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True)

    p_oc = oracle_sub.add_parser("count", help="exact partition function")
    _add_instance_arg(p_oc)
    _add_oracle_budget(p_oc)
    p_oc.set_defaults(func=_cmd_oracle_count)

    p_or = oracle_sub.add_parser("ratio", help="exact marginal ratio of an edge")
    _add_instance_arg(p_or)
    p_or.add_argument("--edge", type=int, required=True)
    _add_oracle_budget(p_or)
    p_or.set_defaults(func=_cmd_oracle_ratio)

    p_om = oracle_sub.add_parser("marginal", help="exact conditional marginal")
    _add_instance_arg(p_om)
    p_om.add_argument("--edge", type=int, required=True)
    p_om.add_argument("--value", type=int, choices=(0, 1), required=True)
    p_om.add_argument(
        "--given",
        type=_given_arg,
        action="append",
        default=[],
        metavar="EDGE=VALUE",
        help="condition on an edge assignment (repeatable)",
    )
    _add_oracle_budget(p_om)
    p_om.set_defaults(func=_cmd_oracle_marginal)

    p_tree = sub.add_parser("tree", help="build and summarize the coupling tree")
    _add_instance_arg(p_tree)
    p_tree.add_argument("--ell", type=int, required=True)
    p_tree.add_argument("--halfedge", type=int, default=None)
    p_tree.add_argument("--dump", action="store_true")
    _add_tree_budget(p_tree)
    p_tree.set_defaults(func=_cmd_tree)

    p_lp = sub.add_parser("lp-check", help="test feasibility of a ratio bracket")
    _add_instance_arg(p_lp)
    p_lp.add_argument("--ell", type=int, required=True)
    p_lp.add_argument("--rminus", type=_fraction_arg, required=True)
    p_lp.add_argument("--rplus", type=_fraction_arg, required=True)
    p_lp.add_argument("--halfedge", type=int, default=None)
    p_lp.add_argument("--dump", action="store_true")
    _add_tree_budget(p_lp)
    p_lp.set_defaults(func=_cmd_lp_check)

    p_verify = sub.add_parser("verify", help="run the oracle-backed invariant suite")
    _add_instance_arg(p_verify)
    p_verify.add_argument("--ell", type=int, default=2)
    _add_oracle_budget(p_verify)
    _add_tree_budget(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def _diagnostic(exc: BaseException) -> None:
    _emit({"error": type(exc).__name__, "message": str(exc)})


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        _diagnostic(exc)
        return EXIT_PARSE
    except _BUDGET_ERRORS as exc:
        _diagnostic(exc)
        return EXIT_BUDGET
    except _VALIDATION_ERRORS as exc:
        _diagnostic(exc)
        return EXIT_VALIDATION
    except InternalError as exc:
        _diagnostic(exc)
        return EXIT_INTERNAL
    except HolcountError as exc:  # any future error class: treat as internal
        _diagnostic(exc)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 — the CLI must not traceback
        _diagnostic(exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
