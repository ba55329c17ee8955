"""Exact rational feasibility testing for systems of linear constraints.

A self-contained decider for "does any point satisfy every row?" over
systems of linear equalities and inequalities with rational
coefficients.  Answers are exact and come with evidence:

* feasible systems yield a rational witness point,
* infeasible systems yield a Farkas certificate: multipliers over the
  input rows (nonnegative on ``<=`` rows, nonpositive on ``>=`` rows,
  unrestricted on ``==`` rows) whose combination has all-zero
  coefficients and negative right-hand side.

Both kinds of evidence are re-verified against the original rows in
exact arithmetic before being returned; a verification failure is a
solver bug and raises :class:`~holcount.errors.InternalError` instead of
returning a possibly wrong verdict.

The decision procedure is a phase-1 primal simplex with Bland's
anti-cycling rule on a standard-form translation of the input.  A
deterministic presolve shrinks the system first (constant-row removal,
fixed-variable and two-variable equality substitution, bound extraction
from singleton inequality rows); every reduction records the row
combination that produced it, so certificates map back to the caller's
row indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InternalError

LE = "<="
GE = ">="
EQ = "=="

_RELATIONS = (LE, GE, EQ)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LinearRow:
    """One linear constraint: ``sum(coeffs[v] * x[v]) relation rhs``."""

    coeffs: Mapping[int, Fraction]
    relation: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        cleaned = {}
        for var, coeff in self.coeffs.items():
            coeff = Fraction(coeff)
            if coeff != 0:
                cleaned[int(var)] = coeff
        object.__setattr__(self, "coeffs", cleaned)
        object.__setattr__(self, "rhs", Fraction(self.rhs))


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of :func:`check_feasibility`, with verified evidence.

    ``witness`` maps every variable mentioned by the rows to a rational
    value satisfying all of them (feasible case).  ``certificate`` maps
    row indices to Farkas multipliers combining the rows into an exact
    contradiction (infeasible case).
    """

    feasible: bool
    witness: dict[int, Fraction] | None = None
    certificate: dict[int, Fraction] | None = None


def row_satisfied(row: LinearRow, point: Mapping[int, Fraction]) -> bool:
    """Evaluate one row at a point, exactly."""

    total = sum((coeff * point[var] for var, coeff in row.coeffs.items()), ZERO)
    if row.relation == LE:
        return total <= row.rhs
    if row.relation == GE:
        return total >= row.rhs
    return total == row.rhs


def check_feasibility(
    rows: Sequence[LinearRow],
    *,
    use_presolve: bool = True,
    pivot_limit: int = 500_000,
) -> FeasibilityResult:
    """Decide feasibility of ``rows`` exactly, with verified evidence.

    Row indices in the returned certificate refer to positions in
    ``rows``.  The witness covers exactly the variables mentioned by at
    least one row.
    """

    variables = sorted({v for row in rows for v in row.coeffs})
    works = _ingest(rows)
    substitutions: list[tuple[int, Fraction, dict[int, Fraction]]] = []
    bounds: dict[int, _Bound] = {}
    try:
        if use_presolve:
            _presolve(works, bounds, substitutions)
        else:
            _extract_bounds(works, bounds)
        core_values = _solve_core(works, bounds, rows, pivot_limit)
    except _Infeasible as stop:
        certificate = {k: v for k, v in stop.certificate.items() if v != 0}
        _verify_certificate(rows, certificate)
        return FeasibilityResult(False, certificate=certificate)
    witness = _assemble_witness(variables, core_values, bounds, substitutions)
    _verify_witness(rows, witness)
    return FeasibilityResult(True, witness=witness)


def _add_scaled(target: dict, source: Mapping, factor: Fraction) -> None:
    """In place ``target += factor * source`` with zero-entry cleanup."""

    if factor == 0:
        return
    for key, value in source.items():
        updated = target.get(key, ZERO) + factor * value
        if updated == 0:
            target.pop(key, None)
        else:
            target[key] = updated


class _Work:
    """A live constraint during presolve: ``coeffs . x (<=|==) rhs``.

    ``origin`` expresses the row as an exact combination of the caller's
    rows, so any contradiction or dual multiplier found later can be
    mapped back.  ``>=`` input rows are negated on ingest (weight -1).
    """

    __slots__ = ("coeffs", "is_eq", "rhs", "origin", "alive")

    def __init__(self, coeffs: dict, is_eq: bool, rhs: Fraction, origin: dict):
        self.coeffs = coeffs
        self.is_eq = is_eq
        self.rhs = rhs
        self.origin = origin
        self.alive = True


class _Bound:
    """Tightest one-sided bounds seen for a variable, with provenance.

    Each side keeps the working singleton row it came from (coefficient,
    rhs, origin) so later certificates can spend multipliers on it.
    Lower bounds come from rows with a negative coefficient, upper
    bounds from rows with a positive one.
    """

    __slots__ = ("lower", "lower_row", "upper", "upper_row")

    def __init__(self) -> None:
        self.lower: Fraction | None = None
        self.lower_row: tuple[Fraction, Fraction, dict] | None = None
        self.upper: Fraction | None = None
        self.upper_row: tuple[Fraction, Fraction, dict] | None = None


class _Infeasible(Exception):
    """Internal signal carrying an original-row Farkas certificate."""

    def __init__(self, certificate: dict[int, Fraction]):
        super().__init__("infeasible")
        self.certificate = certificate


def _ingest(rows: Sequence[LinearRow]) -> list[_Work]:
    works = []
    for index, row in enumerate(rows):
        if row.relation == GE:
            coeffs = {v: -c for v, c in row.coeffs.items()}
            works.append(_Work(coeffs, False, -row.rhs, {index: -ONE}))
        else:
            works.append(
                _Work(dict(row.coeffs), row.relation == EQ, Fraction(row.rhs), {index: ONE})
            )
    return works


def _presolve(
    works: list[_Work],
    bounds: dict[int, _Bound],
    substitutions: list[tuple[int, Fraction, dict[int, Fraction]]],
) -> None:
    """Shrink the system by equivalence-preserving reductions.

    Alternates substitution passes (constant rows, one- and two-variable
    equalities) with bound extraction from singleton inequality rows,
    until a fixpoint.  Raises :class:`_Infeasible` with an original-row
    certificate when a contradiction surfaces.  Equality rows are only
    ever combined with other equality rows, keeping certificate signs
    valid under arbitrary later multipliers.
    """

    var_rows: dict[int, set[int]] = {}
    for rid, work in enumerate(works):
        for var in work.coeffs:
            var_rows.setdefault(var, set()).add(rid)

    def substitute(target: _Work, tid: int, var: int, source: _Work) -> None:
        coeff = target.coeffs.get(var)
        if coeff is None:
            return
        factor = -coeff / source.coeffs[var]
        for svar in source.coeffs:
            if svar != var and svar not in target.coeffs:
                var_rows.setdefault(svar, set()).add(tid)
        _add_scaled(target.coeffs, source.coeffs, factor)
        for svar in list(source.coeffs):
            if svar not in target.coeffs:
                var_rows.get(svar, set()).discard(tid)
        target.rhs += factor * source.rhs
        _add_scaled(target.origin, source.origin, factor)

    def retire(rid: int) -> None:
        work = works[rid]
        work.alive = False
        for var in work.coeffs:
            var_rows.get(var, set()).discard(rid)

    queue: list[int] = list(range(len(works)))

    def eliminate_via_equality(rid: int, var: int) -> None:
        source = works[rid]
        pivot = source.coeffs[var]
        expr_terms = {v: -c / pivot for v, c in source.coeffs.items() if v != var}
        substitutions.append((var, source.rhs / pivot, expr_terms))
        retire(rid)
        for tid in list(var_rows.get(var, set())):
            substitute(works[tid], tid, var, source)
            queue.append(tid)
        var_rows.pop(var, None)
        # Bounds already recorded for the eliminated variable become rows
        # over its replacement expression and re-enter the queue.
        recorded = bounds.pop(var, None)
        if recorded is not None:
            for side in (recorded.lower_row, recorded.upper_row):
                if side is None:
                    continue
                coeff, rhs, origin = side
                reborn = _Work({var: coeff}, False, rhs, dict(origin))
                works.append(reborn)
                tid = len(works) - 1
                var_rows.setdefault(var, set()).add(tid)
                substitute(reborn, tid, var, source)
                queue.append(tid)

    while True:
        while queue:
            rid = queue.pop()
            work = works[rid]
            if not work.alive:
                continue
            size = len(work.coeffs)
            if size == 0:
                broken = work.rhs != 0 if work.is_eq else work.rhs < 0
                if broken:
                    factor = -ONE if work.rhs > 0 else ONE
                    raise _Infeasible({k: factor * v for k, v in work.origin.items()})
                retire(rid)
            elif work.is_eq and size <= 2:
                eliminate_via_equality(rid, max(work.coeffs))
        progressed = False
        for rid, work in enumerate(works):
            if work.alive and not work.is_eq and len(work.coeffs) == 1:
                _record_bound(work, bounds)
                retire(rid)
                progressed = True
        for bound in bounds.values():
            if (
                bound.lower is not None
                and bound.upper is not None
                and bound.lower > bound.upper
            ):
                raise _Infeasible(_bound_clash_certificate(bound))
        if not progressed and not queue:
            return


def _extract_bounds(works: list[_Work], bounds: dict[int, _Bound]) -> None:
    """Bound extraction alone, for the no-presolve code path."""

    for work in works:
        if work.alive and not work.is_eq and len(work.coeffs) == 1:
            _record_bound(work, bounds)
            work.alive = False
    for bound in bounds.values():
        if bound.lower is not None and bound.upper is not None and bound.lower > bound.upper:
            raise _Infeasible(_bound_clash_certificate(bound))


def _record_bound(work: _Work, bounds: dict[int, _Bound]) -> None:
    (var,) = work.coeffs
    coeff = work.coeffs[var]
    value = work.rhs / coeff
    bound = bounds.setdefault(var, _Bound())
    if coeff > 0:
        if bound.upper is None or value < bound.upper:
            bound.upper = value
            bound.upper_row = (coeff, work.rhs, dict(work.origin))
    else:
        if bound.lower is None or value > bound.lower:
            bound.lower = value
            bound.lower_row = (coeff, work.rhs, dict(work.origin))


def _bound_clash_certificate(bound: _Bound) -> dict[int, Fraction]:
    lb_coeff, _, lb_origin = bound.lower_row
    ub_coeff, _, ub_origin = bound.upper_row
    certificate: dict[int, Fraction] = {}
    _add_scaled(certificate, lb_origin, ub_coeff)
    _add_scaled(certificate, ub_origin, -lb_coeff)
    return certificate


def _solve_core(
    works: list[_Work],
    bounds: dict[int, _Bound],
    rows: Sequence[LinearRow],
    pivot_limit: int,
) -> dict[int, Fraction]:
    """Phase-1 simplex on the presolved rows.

    Returns original-variable values for every variable appearing in a
    surviving row, or raises :class:`_Infeasible` with an original-row
    certificate extracted from the optimal dual.
    """

    alive = [w for w in works if w.alive]
    core_vars = sorted({v for w in alive for v in w.coeffs})

    # Column layout: per variable either one shifted column (x = lb + x',
    # x' >= 0) or a split pair (x = pos - neg); then slacks for <= rows
    # and artificials for rows lacking an identity column.
    shift: dict[int, Fraction] = {}
    pos_col: dict[int, int] = {}
    neg_col: dict[int, int] = {}
    next_col = 0
    for var in core_vars:
        bound = bounds.get(var)
        if bound is not None and bound.lower is not None:
            shift[var] = bound.lower
            pos_col[var] = next_col
            next_col += 1
        else:
            pos_col[var] = next_col
            neg_col[var] = next_col + 1
            next_col += 2

    std_rows: list[dict[int, Fraction]] = []
    std_rhs: list[Fraction] = []
    std_eq: list[bool] = []
    std_origin: list[dict] = []

    def push(coeffs: Mapping[int, Fraction], rhs: Fraction, is_eq: bool, origin: dict) -> None:
        translated: dict[int, Fraction] = {}
        shifted = rhs
        for var, coeff in coeffs.items():
            translated[pos_col[var]] = coeff
            if var in neg_col:
                translated[neg_col[var]] = -coeff
            else:
                shifted -= coeff * shift[var]
        std_rows.append(translated)
        std_rhs.append(shifted)
        std_eq.append(is_eq)
        std_origin.append(origin)

    for work in alive:
        push(work.coeffs, work.rhs, work.is_eq, work.origin)
    for var in core_vars:
        bound = bounds.get(var)
        if bound is not None and bound.upper is not None:
            coeff, rhs, origin = bound.upper_row
            push({var: ONE}, rhs / coeff, False, {k: v / coeff for k, v in origin.items()})

    slack_col: list[int | None] = []
    sign: list[Fraction] = []
    for i, row in enumerate(std_rows):
        if not std_eq[i]:
            row[next_col] = ONE
            slack_col.append(next_col)
            next_col += 1
        else:
            slack_col.append(None)
        if std_rhs[i] < 0:
            sign.append(-ONE)
            std_rhs[i] = -std_rhs[i]
            for col in list(row):
                row[col] = -row[col]
        else:
            sign.append(ONE)

    artificial_col: list[int | None] = []
    basis: list[int] = []
    art_cols: set[int] = set()
    for i, row in enumerate(std_rows):
        col = slack_col[i]
        if col is not None and row.get(col) == ONE:
            basis.append(col)
            artificial_col.append(None)
        else:
            row[next_col] = ONE
            basis.append(next_col)
            artificial_col.append(next_col)
            art_cols.add(next_col)
            next_col += 1

    # Reduced costs for "minimize the sum of artificials".  Starting from
    # the artificial basis, the reduced cost of column j is minus the sum
    # of its entries over artificial rows; basic artificials sit at zero.
    objective: dict[int, Fraction] = {}
    obj_rhs = ZERO
    col_rows: dict[int, set[int]] = {}
    for i, row in enumerate(std_rows):
        for col in row:
            col_rows.setdefault(col, set()).add(i)
        if artificial_col[i] is not None:
            _add_scaled(objective, row, -ONE)
            obj_rhs -= std_rhs[i]
    for col in art_cols:
        objective.pop(col, None)

    banned: set[int] = set()
    pivots = 0
    while True:
        entering = None
        for col, value in objective.items():
            if value < 0 and col not in banned and (entering is None or col < entering):
                entering = col
        if entering is None:
            break
        leaving_row = None
        best_ratio = None
        for i in sorted(col_rows.get(entering, ())):
            coeff = std_rows[i].get(entering, ZERO)
            if coeff <= 0:
                continue
            ratio = std_rhs[i] / coeff
            if (
                best_ratio is None
                or ratio < best_ratio
                or (ratio == best_ratio and basis[i] < basis[leaving_row])
            ):
                best_ratio = ratio
                leaving_row = i
        if leaving_row is None:
            raise InternalError("phase-1 objective unbounded; solver invariant broken")
        pivots += 1
        if pivots > pivot_limit:
            raise InternalError(f"simplex pivot limit {pivot_limit} exceeded")
        _pivot(std_rows, std_rhs, col_rows, basis, leaving_row, entering)
        if basis[leaving_row] in art_cols:
            banned.add(basis[leaving_row])
        reduced = objective.get(entering)
        if reduced:
            _add_scaled(objective, std_rows[leaving_row], -reduced)
            obj_rhs -= reduced * std_rhs[leaving_row]
        basis[leaving_row] = entering

    infeasibility = -obj_rhs
    if infeasibility < 0:
        raise InternalError("negative phase-1 optimum; solver invariant broken")
    if infeasibility > 0:
        raise _Infeasible(
            _extract_certificate(
                rows, std_origin, sign, slack_col, artificial_col, objective, bounds
            )
        )

    col_value: dict[int, Fraction] = {}
    for i, col in enumerate(basis):
        col_value[col] = std_rhs[i]
    values: dict[int, Fraction] = {}
    for var in core_vars:
        amount = col_value.get(pos_col[var], ZERO)
        if var in neg_col:
            amount -= col_value.get(neg_col[var], ZERO)
        else:
            amount += shift[var]
        values[var] = amount
    return values


def _pivot(
    std_rows: list[dict[int, Fraction]],
    std_rhs: list[Fraction],
    col_rows: dict[int, set[int]],
    basis: list[int],
    pivot_row: int,
    pivot_col: int,
) -> None:
    row = std_rows[pivot_row]
    pivot_value = row[pivot_col]
    if pivot_value != 1:
        for col in list(row):
            row[col] /= pivot_value
        std_rhs[pivot_row] /= pivot_value
    for i in list(col_rows.get(pivot_col, ())):
        if i == pivot_row:
            continue
        other = std_rows[i]
        factor = other.get(pivot_col)
        if not factor:
            continue
        for col, value in row.items():
            updated = other.get(col, ZERO) - factor * value
            if updated == 0:
                if col in other:
                    del other[col]
                    col_rows[col].discard(i)
            else:
                if col not in other:
                    col_rows.setdefault(col, set()).add(i)
                other[col] = updated
        std_rhs[i] -= factor * std_rhs[pivot_row]


def _extract_certificate(
    rows: Sequence[LinearRow],
    std_origin: list[dict],
    sign: list[Fraction],
    slack_col: list[int | None],
    artificial_col: list[int | None],
    objective: dict[int, Fraction],
    bounds: dict[int, _Bound],
) -> dict[int, Fraction]:
    """Map the optimal phase-1 dual back to caller-row multipliers.

    The dual value of each standard row is read off its initial identity
    column (artificial where one was created, otherwise the slack): for
    a cost-1 artificial the final reduced cost is 1 - y, for a cost-0
    slack it is -y.  Residual coefficients left on lower-bounded
    variables are absorbed into the bound rows that justified their
    column shifts.
    """

    certificate: dict[int, Fraction] = {}
    for i, origin in enumerate(std_origin):
        col = artificial_col[i]
        if col is not None:
            dual = ONE - objective.get(col, ZERO)
        else:
            dual = -objective.get(slack_col[i], ZERO)
        _add_scaled(certificate, origin, -dual * sign[i])
    combined: dict[int, Fraction] = {}
    for index, multiplier in certificate.items():
        _add_scaled(combined, rows[index].coeffs, multiplier)
    for var in sorted(combined):
        residual = combined[var]
        bound = bounds.get(var)
        if bound is None or bound.lower_row is None:
            raise InternalError("certificate residual on an unshifted variable")
        lb_coeff, _, lb_origin = bound.lower_row
        _add_scaled(certificate, lb_origin, -residual / lb_coeff)
    return certificate


def _assemble_witness(
    variables: list[int],
    core_values: dict[int, Fraction],
    bounds: dict[int, _Bound],
    substitutions: list[tuple[int, Fraction, dict[int, Fraction]]],
) -> dict[int, Fraction]:
    witness = dict(core_values)
    eliminated = {var for var, _, _ in substitutions}
    for var in variables:
        if var in witness or var in eliminated:
            continue
        bound = bounds.get(var)
        if bound is not None and bound.lower is not None:
            witness[var] = bound.lower
        elif bound is not None and bound.upper is not None:
            witness[var] = min(bound.upper, ZERO)
        else:
            witness[var] = ZERO
    for var, constant, terms in reversed(substitutions):
        witness[var] = constant + sum(
            (coeff * witness[other] for other, coeff in terms.items()), ZERO
        )
    return witness


def _verify_witness(rows: Sequence[LinearRow], witness: dict[int, Fraction]) -> None:
    for index, row in enumerate(rows):
        if not row_satisfied(row, witness):
            raise InternalError(f"witness violates row {index}; solver self-check failed")


def _verify_certificate(rows: Sequence[LinearRow], certificate: dict[int, Fraction]) -> None:
    combined: dict[int, Fraction] = {}
    total = ZERO
    for index, multiplier in certificate.items():
        if not isinstance(index, int) or not 0 <= index < len(rows):
            raise InternalError("certificate names an unknown row")
        row = rows[index]
        if row.relation == LE and multiplier < 0:
            raise InternalError(f"certificate sign clash on row {index}")
        if row.relation == GE and multiplier > 0:
            raise InternalError(f"certificate sign clash on row {index}")
        _add_scaled(combined, row.coeffs, multiplier)
        total += multiplier * row.rhs
    if combined:
        raise InternalError("certificate combination has nonzero coefficients")
    if total >= 0:
        raise InternalError("certificate combination fails to contradict")
