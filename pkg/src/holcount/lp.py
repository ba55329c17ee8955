"""Linear-program encoding of coupling-tree visit probabilities.

Given a coupling tree for a pinned half-edge and a candidate bracket
[r-, r+] for the conditional marginal ratio, this module builds a linear
program whose variables stand for normalized visit probabilities of the
coupling process at each tree node — one sigma-side and one tau-side
variable per node, plus per-edge branch variables at internal nodes.
The program is feasible whenever the bracket contains the true ratio,
and any feasible point certifies a two-sided bound on it, which is what
the bracket-halving estimator consumes.

Six constraint families are emitted:

1. box bounds [0, 1] on every variable and the two root pins to 1;
2. flow conservation: each node variable splits across the branch
   variables of its frontier edges;
3. child-group sums: per (node, edge, side, value) the variables of the
   children assigning that value agree with the branch variable — an
   equality emitted only when extending that side's assignment by the
   value stays feasible (the children of a group whose extension is
   infeasible are all zero-pinned by family 6, but the branch variable
   itself may still carry the other side's mass);
4. two-sided ratio inequalities tying sigma to tau at feasible good
   leaves, scaled by the local weight ratio;
5. lower bounds on the mass of all-zero frontier extensions, with
   coefficient B (the marginal floor);
6. zero pins at infeasible nodes.

Feasibility is decided exactly by :mod:`holcount.simplex`; no
tolerances are involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import DomainError, InternalError, InvalidBracket
from .instances import HolantInstance, is_feasible_partial
from .oracle import TreeProbabilityTable
from .simplex import EQ, GE, LE, FeasibilityResult, LinearRow, check_feasibility
from .tree import CouplingTree, descendant_set_D, good_leaf_weight_ratio

_KINDS = ("ps", "pt", "pse", "pte")

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LpVariable:
    """One LP variable: a (kind, node) or (kind, node, edge) probability.

    Kinds: ``ps`` / ``pt`` are the sigma- and tau-side node variables;
    ``pse`` / ``pte`` are their per-frontier-edge branch variables,
    present only at internal feasible nodes.
    """

    index: int
    kind: str
    node: int
    edge: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if (self.edge is not None) != (self.kind in ("pse", "pte")):
            raise ValueError("edge must be given exactly for pse/pte variables")

    @property
    def name(self) -> str:
        if self.edge is None:
            return f"{self.kind}:{self.node}"
        return f"{self.kind}:{self.node}:{self.edge}"


@dataclass(frozen=True)
class LpConstraint:
    """``sum(coeffs[i] * x[i]) relation rhs``, tagged with its family."""

    coeffs: Mapping[int, Fraction]
    relation: str
    rhs: Fraction
    family: int


@dataclass(frozen=True)
class LpProblem:
    variables: tuple[LpVariable, ...]
    constraints: tuple[LpConstraint, ...]
    box: tuple[Fraction, Fraction] = (ZERO, ONE)
    name_to_index: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        mapping = {v.name: v.index for v in self.variables}
        if len(mapping) != len(self.variables):
            raise InternalError("duplicate LP variable names")
        object.__setattr__(self, "name_to_index", mapping)

    @property
    def family_counts(self) -> dict[int, int]:
        counts = {family: 0 for family in range(1, 7)}
        for constraint in self.constraints:
            counts[constraint.family] += 1
        return counts

    def variable_index(self, name: str) -> int:
        return self.name_to_index[name]

    def dump(self) -> str:
        """Plain-text rendering: one constraint per line, exact rationals."""

        lines = []
        for constraint in self.constraints:
            terms = []
            for index in sorted(constraint.coeffs):
                coeff = constraint.coeffs[index]
                name = self.variables[index].name
                magnitude = -coeff if coeff < 0 else coeff
                body = name if magnitude == 1 else f"{_frac(magnitude)}*{name}"
                if not terms:
                    terms.append(f"-{body}" if coeff < 0 else body)
                else:
                    terms.append(f"- {body}" if coeff < 0 else f"+ {body}")
            lhs = " ".join(terms) if terms else "0"
            relation = "=" if constraint.relation == EQ else constraint.relation
            lines.append(f"f{constraint.family}: {lhs} {relation} {_frac(constraint.rhs)}")
        return "\n".join(lines)


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def build_lp(
    tree: CouplingTree,
    instance: HolantInstance,
    r_minus: Fraction,
    r_plus: Fraction,
    B: Fraction,
) -> LpProblem:
    """Assemble the six constraint families for a bracket [r-, r+].

    Raises:
        InvalidBracket: r- is negative or exceeds r+.
        DomainError: B outside (0, 1].
    """

    r_minus = Fraction(r_minus)
    r_plus = Fraction(r_plus)
    B = Fraction(B)
    if r_minus < 0 or r_minus > r_plus:
        raise InvalidBracket(f"need 0 <= r- <= r+, got r-={r_minus}, r+={r_plus}")
    if not 0 < B <= 1:
        raise DomainError(f"B must lie in (0, 1], got {B}")

    variables: list[LpVariable] = []
    index: dict[tuple[str, int, int | None], int] = {}

    def declare(kind: str, node_id: int, edge: int | None = None) -> int:
        slot = len(variables)
        variables.append(LpVariable(slot, kind, node_id, edge))
        index[(kind, node_id, edge)] = slot
        return slot

    for node in tree.nodes:
        declare("ps", node.id)
        declare("pt", node.id)
        if not node.leaf and node.feasible:
            for e in sorted(node.children_by_edge):
                declare("pse", node.id, e)
                declare("pte", node.id, e)

    constraints: list[LpConstraint] = []

    def emit(coeffs: dict[int, Fraction], relation: str, rhs: Fraction, family: int) -> None:
        constraints.append(LpConstraint(dict(coeffs), relation, Fraction(rhs), family))

    # Family 1: box on every variable, then the root pinned to 1 on both sides.
    for variable in variables:
        emit({variable.index: ONE}, GE, ZERO, 1)
        emit({variable.index: ONE}, LE, ONE, 1)
    emit({index[("ps", 0, None)]: ONE}, EQ, ONE, 1)
    emit({index[("pt", 0, None)]: ONE}, EQ, ONE, 1)

    # Family 2: node mass splits across its frontier-edge branch variables.
    for node in tree.nodes:
        if node.leaf or not node.feasible:
            continue
        for kind, edge_kind in (("ps", "pse"), ("pt", "pte")):
            coeffs = {index[(kind, node.id, None)]: ONE}
            for e in sorted(node.children_by_edge):
                coeffs[index[(edge_kind, node.id, e)]] = -ONE
            emit(coeffs, EQ, ZERO, 2)

    # Family 3: per (node, edge, side, value) the children assigning that
    # value to the edge carry exactly the branch variable's mass — emitted
    # only when that side's extension by the value is itself feasible.
    for node in tree.nodes:
        if node.leaf or not node.feasible:
            continue
        for e in sorted(node.children_by_edge):
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
            for side, kind, edge_kind in (("sigma", "ps", "pse"), ("tau", "pt", "pte")):
                partial = getattr(node.label, side)
                for value in (0, 1):
                    if not is_feasible_partial(instance, partial.assign(e, value)):
                        continue
                    coeffs = {index[(edge_kind, node.id, e)]: -ONE}
                    for child in groups[side][value]:
                        coeffs[index[(kind, child, None)]] = (
                            coeffs.get(index[(kind, child, None)], ZERO) + ONE
                        )
                    emit(coeffs, EQ, ZERO, 3)

    # Family 4: sigma/tau ratio bracket at feasible good leaves.
    for node in tree.nodes:
        if not (node.good_leaf and node.feasible):
            continue
        ratio = good_leaf_weight_ratio(instance, node)
        ps = index[("ps", node.id, None)]
        pt = index[("pt", node.id, None)]
        emit({ps: ONE, pt: -r_minus * ratio}, GE, ZERO, 4)
        emit({ps: ONE, pt: -r_plus * ratio}, LE, ZERO, 4)

    # Family 5: the all-zero frontier extensions of an internal node retain
    # at least a B fraction of its mass.
    for node in tree.nodes:
        if node.leaf or not node.feasible:
            continue
        members = sorted(descendant_set_D(tree, node.id))
        for kind in ("ps", "pt"):
            coeffs = {index[(kind, node.id, None)]: -B}
            for member in members:
                slot = index[(kind, member, None)]
                coeffs[slot] = coeffs.get(slot, ZERO) + ONE
            emit(coeffs, GE, ZERO, 5)

    # Family 6: infeasible nodes carry no mass on either side.
    for node in tree.nodes:
        if node.feasible:
            continue
        emit({index[("ps", node.id, None)]: ONE}, EQ, ZERO, 6)
        emit({index[("pt", node.id, None)]: ONE}, EQ, ZERO, 6)

    return LpProblem(tuple(variables), tuple(constraints))


def to_rows(problem: LpProblem) -> list[LinearRow]:
    """Constraints as solver rows, index-aligned with ``problem.constraints``."""

    return [
        LinearRow(constraint.coeffs, constraint.relation, constraint.rhs)
        for constraint in problem.constraints
    ]


def solve(problem: LpProblem, *, use_presolve: bool = True) -> FeasibilityResult:
    """Exact feasibility decision with verified witness or certificate."""

    return check_feasibility(to_rows(problem), use_presolve=use_presolve)


def check_feasible(problem: LpProblem) -> bool:
    """True iff some exact rational point satisfies every constraint."""

    return solve(problem).feasible


def violated_constraints(problem: LpProblem, point: Mapping[int, Fraction]) -> list[int]:
    """Indices of constraints the point fails, exactly; [] means it satisfies all."""

    rows = to_rows(problem)
    out = []
    for position, row in enumerate(rows):
        total = sum((c * Fraction(point[v]) for v, c in row.coeffs.items()), ZERO)
        ok = (
            total <= row.rhs
            if row.relation == LE
            else total >= row.rhs
            if row.relation == GE
            else total == row.rhs
        )
        if not ok:
            out.append(position)
    return out


def point_from_table(problem: LpProblem, table: TreeProbabilityTable) -> dict[int, Fraction]:
    """Exact-probability assignment for every LP variable.

    Substituting this point should satisfy the whole program whenever the
    bracket used to build it contains the true marginal ratio.
    """

    point: dict[int, Fraction] = {}
    for variable in problem.variables:
        if variable.kind == "ps":
            point[variable.index] = table.p_sigma[variable.node]
        elif variable.kind == "pt":
            point[variable.index] = table.p_tau[variable.node]
        elif variable.kind == "pse":
            point[variable.index] = table.edge_sigma[(variable.node, variable.edge)]
        else:
            point[variable.index] = table.edge_tau[(variable.node, variable.edge)]
    return point
