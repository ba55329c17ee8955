"""Marginal-ratio estimation by bracket halving over LP feasibility.

The half-edge estimator maintains a bracket [r1, r2] around the true
conditional marginal ratio of a pinned half-edge, initialized to
[0, r_max].  Each round solves two overlapping-bracket feasibility
programs at the midpoint; the bracket narrows toward the feasible side
until both halves are feasible or the bracket is relatively tight, at
which point the midpoint is a (1 +/- epsilon)-approximation of the true
ratio.  Normal edges reduce to two half-edge estimates by splitting the
edge into stubs and pinning one stub on each side; the two estimates
multiply back together exactly.

Truncation depth for the coupling tree is the smallest power making the
tail factor (1 - B^2)^ell drop to epsilon/2, found with a round-up
fixed-point iteration at 256 fractional bits: the tracked tail never
undershoots the true power, so the chosen depth always delivers the
guarantee, stays exactly minimal in every exactly representable case,
and costs constant space no matter how small B gets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import (
    BudgetExceeded,
    ConditionViolated,
    DomainError,
    InternalError,
    NotANormalEdge,
)
from .graphs import NORMAL, EdgeRef
from .instances import (
    HolantInstance,
    PartialAssignment,
    compute_B,
    r_max,
    split_instance,
)
from .lp import build_lp, check_feasible
from .tree import DEFAULT_MAX_TREE_NODES, build_tree

ZERO = Fraction(0)
ONE = Fraction(1)
QUARTER = Fraction(1, 4)

# Fixed-point precision for tail-factor powering.  256 fractional bits keep
# every rounding step below 2**-256, so the certified upper bound coincides
# with the exact power for all practically distinguishable inputs while its
# size stays constant no matter how deep the truncation.
_TAIL_BITS = 256
_TAIL_ONE = 1 << _TAIL_BITS

# Hard cap on the truncation depth the sequential search will walk to; B
# small enough to need more than this is out of practical reach anyway.
_MAX_ELL = 5_000_000

RoundObserver = Callable[[int, Fraction, Fraction, Fraction, bool, bool], None]


@dataclass(frozen=True)
class RatioEstimate:
    """A certified multiplicative approximation of a marginal ratio.

    ``value`` lies within a (1 +/- epsilon) factor of the true ratio.
    ``ell`` is the truncation depth used (0 when the zero shortcut fired
    and no tree was built), ``rounds`` the number of bracket-halving
    rounds, and ``tree_nodes`` the total size of the coupling trees
    involved.
    """

    value: Fraction
    epsilon: Fraction
    ell: int
    rounds: int
    tree_nodes: int = 0

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("ratio estimates are nonnegative")
        if not 0 < self.epsilon < QUARTER:
            raise ValueError("epsilon must lie in (0, 1/4)")


def choose_ell(B: Fraction, eps: Fraction) -> int:
    """Smallest ell >= 1 whose certified tail bound (1 - B^2)^ell reaches eps/2.

    The tail factor is tracked by a round-up fixed-point iteration: each
    step multiplies the 256-bit mantissa by the exact base and rounds up,
    so the tracked value always dominates the true power while its size
    stays constant — exact rational powering would grow digits linearly
    with the depth and is unusable for the deep truncations small B
    demands.  The chosen depth therefore always satisfies the guarantee
    the estimator relies on; it equals the exactly minimal depth whenever
    the powers are exactly representable (every power-of-two denominator
    is) and can exceed it only across a 2**-256 rounding margin.

    Raises:
        DomainError: B outside (0, 1) or eps outside (0, 1/4).
        BudgetExceeded: B is so small that the required depth passes
            5,000,000 — far beyond anything the LP stage could use.
    """

    B = Fraction(B)
    eps = Fraction(eps)
    if not 0 < B < 1:
        raise DomainError(f"B must lie in (0, 1), got {B}")
    if not 0 < eps < QUARTER:
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    base = ONE - B * B
    target = eps / 2
    num, den = base.numerator, base.denominator
    # mantissa / 2**256 is an upper bound of base**ell throughout.
    mantissa = _TAIL_ONE
    threshold_num = target.numerator * _TAIL_ONE
    threshold_den = target.denominator
    for ell in range(1, _MAX_ELL + 1):
        mantissa = -(-(mantissa * num) // den)
        if mantissa * threshold_den <= threshold_num:
            return ell
    raise BudgetExceeded(
        f"truncation depth for B={B}, eps={eps} exceeds {_MAX_ELL}"
    )


def _round_cap(eps: Fraction) -> int:
    """ceil(log2(2/eps)) + 2 without floating logs."""

    threshold = 2 / Fraction(eps)
    cap = 0
    power = ONE
    while power < threshold:
        power *= 2
        cap += 1
    return cap + 2


def estimate_halfedge_ratio(
    instance: HolantInstance,
    e_bot: int,
    eps: Fraction,
    *,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
    on_round: RoundObserver | None = None,
) -> RatioEstimate:
    """Estimate the marginal ratio of the unique half-edge within (1 +/- eps).

    The instance must carry exactly one half-edge; ``e_bot`` is its edge
    index.  When the anchor vertex rejects a single incident occupied
    edge outright (f(1) = 0) the ratio is exactly 0 and is returned
    immediately, before any feasibility machinery.

    ``on_round``, when given, is called once per bracket-halving round
    with (round, r1, r2, mid, lp1_feasible, lp2_feasible) before the
    termination tests for that round are applied.

    Raises:
        DomainError: eps outside (0, 1/4).
        ConditionViolated: the instance/half-edge pair is not a valid
            coupling root (propagated from tree construction).
        BudgetExceeded: the coupling tree outgrew ``max_tree_nodes``.
    """

    eps = Fraction(eps)
    if not 0 < eps < QUARTER:
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    g = instance.graph
    if len(g.half_edges) != 1 or e_bot != len(g.normal_edges):
        raise ConditionViolated(
            f"edge {e_bot} is not the unique half-edge of the instance"
        )
    (anchor,) = g.half_edges[0]
    if instance.signature_of(anchor)(1) == 0:
        return RatioEstimate(ZERO, eps, ell=0, rounds=0, tree_nodes=0)

    B = compute_B(instance)
    ell = choose_ell(B, eps)
    sigma = PartialAssignment({e_bot: 1})
    tau = PartialAssignment({e_bot: 0})
    tree = build_tree(instance, sigma, tau, anchor, ell, max_nodes=max_tree_nodes)
    # Width threshold for the bracket test.  The depth choice guarantees
    # (1 - B^2)^ell <= eps/2, so stopping once r1 >= r2 * (1 - eps/2)
    # stops no later than the tail-factor width would, it is the width for
    # which the round cap below is provable for every B, and the midpoint
    # returned at that width is still within (1 +/- eps) of the truth:
    # |mid - R| <= (r2 - r1)/2 <= r2 * eps/4 <= R * eps / (4 - 2 eps).
    width = ONE - eps / 2

    r1 = ZERO
    r2 = r_max(instance)
    cap = _round_cap(eps)
    for rounds in range(1, cap + 1):
        mid = (r1 + r2) / 2
        lp1_feasible = check_feasible(build_lp(tree, instance, r1, mid, B))
        lp2_feasible = check_feasible(build_lp(tree, instance, mid, r2, B))
        if on_round is not None:
            on_round(rounds, r1, r2, mid, lp1_feasible, lp2_feasible)
        if (lp1_feasible and lp2_feasible) or r1 >= r2 * width:
            return RatioEstimate(mid, eps, ell=ell, rounds=rounds, tree_nodes=len(tree))
        if lp1_feasible:
            r2 = mid
        else:
            r1 = mid
    raise InternalError(f"bracket halving did not terminate within {cap} rounds")


def estimate_edge_ratio(
    instance: HolantInstance,
    e: EdgeRef | int,
    eps: Fraction,
    *,
    max_tree_nodes: int = DEFAULT_MAX_TREE_NODES,
    on_round: RoundObserver | None = None,
) -> RatioEstimate:
    """Estimate the marginal ratio of a normal edge within (1 +/- eps).

    An endpoint with f(1) = 0 forces the ratio to 0 exactly (shortcut,
    no splitting).  Otherwise the edge is split into two stubs; the two
    pinned sub-instances' half-edge ratios are estimated at eps/3 each
    and multiplied, which lands the product inside (1 +/- eps) for any
    eps < 1/4.

    Raises:
        DomainError: eps outside (0, 1/4).
        NotANormalEdge: e is a half-edge.
    """

    eps = Fraction(eps)
    if not 0 < eps < QUARTER:
        raise DomainError(f"eps must lie in (0, 1/4), got {eps}")
    g = instance.graph
    index = e.index if isinstance(e, EdgeRef) else int(e)
    ref = g.edge_ref(index)
    if ref.kind != NORMAL:
        raise NotANormalEdge(f"edge {index} is a half-edge; ratios split normal edges")
    u, v = g.endpoints(ref)
    if instance.signature_of(u)(1) == 0 or instance.signature_of(v)(1) == 0:
        return RatioEstimate(ZERO, eps, ell=0, rounds=0, tree_nodes=0)

    _, phi1, phi2 = split_instance(instance, ref)
    sub_eps = eps / 3
    first = estimate_halfedge_ratio(
        phi1,
        phi1.graph.num_edges - 1,
        sub_eps,
        max_tree_nodes=max_tree_nodes,
        on_round=on_round,
    )
    second = estimate_halfedge_ratio(
        phi2,
        phi2.graph.num_edges - 1,
        sub_eps,
        max_tree_nodes=max_tree_nodes,
        on_round=on_round,
    )
    return RatioEstimate(
        first.value * second.value,
        eps,
        ell=max(first.ell, second.ell),
        rounds=first.rounds + second.rounds,
        tree_nodes=first.tree_nodes + second.tree_nodes,
    )
