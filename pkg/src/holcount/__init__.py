"""Deterministic approximate counting for log-concave Boolean Holant instances.

The package computes partition functions of edge-assignment models whose
vertex weights are symmetric, log-concave functions of the local Hamming
weight — b-matchings and b-edge-covers being the flagship cases.  The
approximation pipeline telescopes the partition function into per-edge
marginal ratios, brackets each ratio by binary search over linear-program
feasibility on a truncated coupling tree, and certifies every LP verdict with
exact rational arithmetic.  A brute-force oracle provides exact ground truth
on small instances.
"""

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
from .graphs import EdgeRef, Graph, build_graph, incident_edges, remove_edge, split_edge
from .instances import (
    HolantInstance,
    PartialAssignment,
    Signature,
    ValidationReport,
    atleast_signature,
    atmost_signature,
    compute_B,
    hamming_at,
    is_feasible_partial,
    local_polynomial_eval,
    pin,
    r_max,
    signature,
    split_instance,
    unassigned_incident,
    validate_instance,
)
from .oracle import (
    MarginalQuery,
    TreeProbabilityTable,
    amenable_edge_scan,
    assignment_weight,
    conditional_marginal,
    conditional_partition_function,
    exact_tree_probabilities,
    marginal_ratio_exact,
    partition_function,
    simulate_couple,
)
from .tree import (
    DEFAULT_MAX_TREE_NODES,
    PATTERN_BOTH0,
    PATTERN_BOTH1,
    PATTERN_DISCREPANT,
    CouplingTree,
    NodeLabel,
    NodeSets,
    TreeNode,
    build_tree,
    classify_nodes,
    coupling_root_violation,
    descendant_set_D,
    good_leaf_weight_ratio,
)
from .simplex import EQ, GE, LE, FeasibilityResult, LinearRow, check_feasibility, row_satisfied
from .lp import (
    LpConstraint,
    LpProblem,
    LpVariable,
    build_lp,
    check_feasible,
    point_from_table,
    solve,
    to_rows,
    violated_constraints,
)
from .estimator import (
    RatioEstimate,
    choose_ell,
    estimate_edge_ratio,
    estimate_halfedge_ratio,
)
from .counting import (
    EPS_CLAMP,
    CountEstimate,
    approx_partition_function,
    count_b_edge_covers,
    count_b_matchings,
)
from .io import (
    dump_instance,
    format_rational,
    instance_document,
    load_instance,
    loads_instance,
    parse_rational,
)
from .verify import CheckResult, verify_instance
from .oracle import DEFAULT_MAX_ORACLE_EDGES

__version__ = "0.1.0"
