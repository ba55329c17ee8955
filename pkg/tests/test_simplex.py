"""Exact rational feasibility solver, cross-checked against elimination."""

import random
from fractions import Fraction

import pytest

from holcount import EQ, GE, LE, LinearRow, check_feasibility, row_satisfied

F = Fraction


def verify_result(rows, result):
    """Re-verify the returned evidence independently of the solver."""
    if result.feasible:
        assert result.witness is not None and result.certificate is None
        for row in rows:
            point = {v: result.witness.get(v, F(0)) for v in row.coeffs}
            assert row_satisfied(row, point)
    else:
        assert result.certificate is not None and result.witness is None
        combo: dict[int, F] = {}
        rhs = F(0)
        for idx, mult in result.certificate.items():
            row = rows[idx]
            if row.relation == LE:
                assert mult >= 0
            elif row.relation == GE:
                assert mult <= 0
            for var, coeff in row.coeffs.items():
                combo[var] = combo.get(var, F(0)) + mult * coeff
            rhs += mult * row.rhs
        assert all(c == 0 for c in combo.values())
        assert rhs < 0


def check_both(rows, expected):
    for presolve in (True, False):
        result = check_feasibility(rows, use_presolve=presolve)
        assert result.feasible is expected
        verify_result(rows, result)
    return check_feasibility(rows)


# ------------------------------------------------------------- hand systems


def test_empty_system_is_feasible():
    res = check_both([], True)
    assert res.witness == {}


def test_constant_rows():
    check_both([LinearRow({}, LE, F(0))], True)
    check_both([LinearRow({}, EQ, F(0))], True)
    check_both([LinearRow({}, LE, F(-1))], False)
    check_both([LinearRow({}, GE, F(1))], False)
    check_both([LinearRow({}, EQ, F(2))], False)


def test_zero_coefficients_are_dropped():
    row = LinearRow({0: F(0), 1: F(2)}, LE, F(4))
    assert row.coeffs == {1: F(2)}
    assert row_satisfied(row, {1: F(2)})
    assert not row_satisfied(row, {1: F(3)})


def test_rejects_unknown_relation():
    with pytest.raises(ValueError):
        LinearRow({0: F(1)}, "<", F(0))


def test_single_variable_bracket():
    rows = [
        LinearRow({0: F(1)}, GE, F(1, 3)),
        LinearRow({0: F(1)}, LE, F(1, 2)),
    ]
    res = check_both(rows, True)
    assert F(1, 3) <= res.witness[0] <= F(1, 2)

    rows.append(LinearRow({0: F(1)}, LE, F(1, 4)))
    check_both(rows, False)


def test_equality_pair():
    rows = [
        LinearRow({0: F(1), 1: F(1)}, EQ, F(1)),
        LinearRow({0: F(1), 1: F(-1)}, EQ, F(1, 3)),
    ]
    res = check_both(rows, True)
    assert res.witness == {0: F(2, 3), 1: F(1, 3)}


def test_contradictory_equalities():
    rows = [
        LinearRow({0: F(1), 1: F(2)}, EQ, F(1)),
        LinearRow({0: F(2), 1: F(4)}, EQ, F(3)),
    ]
    check_both(rows, False)


def test_inequality_squeeze_onto_plane():
    # x + y >= 1, x + y <= 1, x - y == 0  ->  x = y = 1/2.
    rows = [
        LinearRow({0: F(1), 1: F(1)}, GE, F(1)),
        LinearRow({0: F(1), 1: F(1)}, LE, F(1)),
        LinearRow({0: F(1), 1: F(-1)}, EQ, F(0)),
    ]
    res = check_both(rows, True)
    assert res.witness == {0: F(1, 2), 1: F(1, 2)}


def test_unbounded_direction_is_still_feasible():
    rows = [
        LinearRow({0: F(1), 1: F(-1)}, GE, F(5)),
        LinearRow({0: F(1)}, GE, F(0)),
    ]
    check_both(rows, True)


def test_negative_variables_allowed():
    rows = [
        LinearRow({0: F(1)}, LE, F(-3)),
        LinearRow({0: F(1)}, GE, F(-7, 2)),
    ]
    res = check_both(rows, True)
    assert F(-7, 2) <= res.witness[0] <= F(-3)


def test_equality_chain_substitution():
    # A long chain x0 = x1 = ... = x9, pinned at both ends consistently.
    rows = [
        LinearRow({i: F(1), i + 1: F(-1)}, EQ, F(0)) for i in range(9)
    ]
    rows.append(LinearRow({0: F(1)}, EQ, F(3, 7)))
    rows.append(LinearRow({9: F(1)}, GE, F(1, 7)))
    res = check_both(rows, True)
    assert all(res.witness[i] == F(3, 7) for i in range(10))

    rows.append(LinearRow({9: F(1)}, LE, F(1, 4)))
    check_both(rows, False)


def test_triangle_system_with_fractional_vertex():
    rows = [
        LinearRow({0: F(2), 1: F(1)}, LE, F(2)),
        LinearRow({0: F(1), 1: F(3)}, LE, F(3)),
        LinearRow({0: F(-1)}, LE, F(0)),
        LinearRow({1: F(-1)}, LE, F(0)),
        LinearRow({0: F(1), 1: F(1)}, GE, F(7, 5)),
    ]
    # The corner of the first two rows is (3/5, 4/5), summing to 7/5 exactly.
    check_both(rows, True)
    rows[-1] = LinearRow({0: F(1), 1: F(1)}, GE, F(7, 5) + F(1, 100))
    check_both(rows, False)


def test_certificate_points_at_original_rows():
    rows = [
        LinearRow({0: F(1)}, GE, F(2)),
        LinearRow({}, EQ, F(0)),  # padding so indices matter
        LinearRow({0: F(1)}, LE, F(1)),
    ]
    res = check_feasibility(rows)
    assert not res.feasible
    assert set(res.certificate) <= {0, 1, 2}
    assert all(res.certificate.get(i, F(0)) == 0 for i in (1,))
    verify_result(rows, res)


# -------------------------------------------- randomized elimination oracle


def fourier_motzkin_feasible(rows, variables):
    """Decide feasibility by Fourier-Motzkin elimination (exponential)."""
    # Normalize everything to <=: (coeffs, rhs) meaning coeffs . x <= rhs.
    system = []
    for row in rows:
        if row.relation in (LE, EQ):
            system.append((dict(row.coeffs), row.rhs))
        if row.relation in (GE, EQ):
            system.append(
                ({v: -c for v, c in row.coeffs.items()}, -row.rhs)
            )
    for x in variables:
        lower, upper, rest = [], [], []
        for coeffs, rhs in system:
            c = coeffs.get(x, F(0))
            if c > 0:
                upper.append((coeffs, rhs, c))
            elif c < 0:
                lower.append((coeffs, rhs, c))
            else:
                rest.append((coeffs, rhs))
        new = rest
        for lc, lr, lcoef in lower:
            for uc, ur, ucoef in upper:
                scale_l = F(1) / -lcoef
                scale_u = F(1) / ucoef
                merged = {}
                for v, c in lc.items():
                    if v != x:
                        merged[v] = merged.get(v, F(0)) + scale_l * c
                for v, c in uc.items():
                    if v != x:
                        merged[v] = merged.get(v, F(0)) + scale_u * c
                new.append((merged, scale_l * lr + scale_u * ur))
        system = new
    return all(rhs >= 0 for coeffs, rhs in system)


def random_system(rng):
    n_vars = rng.randint(1, 4)
    n_rows = rng.randint(1, 6)
    rows = []
    for _ in range(n_rows):
        coeffs = {
            v: F(rng.randint(-3, 3))
            for v in rng.sample(range(n_vars), rng.randint(1, n_vars))
        }
        relation = rng.choice((LE, GE, EQ))
        rhs = F(rng.randint(-4, 4), rng.randint(1, 3))
        rows.append(LinearRow(coeffs, relation, rhs))
    return rows, list(range(n_vars))


def test_matches_elimination_on_random_systems():
    rng = random.Random(20260816)
    for trial in range(150):
        rows, variables = random_system(rng)
        expected = fourier_motzkin_feasible(rows, variables)
        for presolve in (True, False):
            res = check_feasibility(rows, use_presolve=presolve)
            assert res.feasible is expected, (trial, rows)
            verify_result(rows, res)


def test_random_point_systems_are_feasible():
    # Build systems that are satisfied by a known random point, so the
    # expected answer is feasible by construction.
    rng = random.Random(7)
    for _ in range(60):
        n_vars = rng.randint(1, 5)
        point = {v: F(rng.randint(-6, 6), rng.randint(1, 4)) for v in range(n_vars)}
        rows = []
        for _ in range(rng.randint(1, 8)):
            chosen = rng.sample(range(n_vars), rng.randint(1, n_vars))
            coeffs = {v: F(rng.randint(-5, 5)) for v in chosen}
            value = sum(coeffs[v] * point[v] for v in chosen)
            slack = F(rng.randint(0, 3))
            relation = rng.choice((LE, GE, EQ))
            if relation == LE:
                rows.append(LinearRow(coeffs, LE, value + slack))
            elif relation == GE:
                rows.append(LinearRow(coeffs, GE, value - slack))
            else:
                rows.append(LinearRow(coeffs, EQ, value))
        for presolve in (True, False):
            res = check_feasibility(rows, use_presolve=presolve)
            assert res.feasible
            verify_result(rows, res)


def test_pairwise_distance_infeasible_cluster():
    # x_i - x_j <= -1 cyclically is infeasible (sums to 0 <= -k).
    for k in (2, 3, 5):
        rows = [
            LinearRow({i: F(1), (i + 1) % k: F(-1)}, LE, F(-1)) for i in range(k)
        ]
        res = check_both(rows, False)
        # The certificate must use every row of the cycle.
        assert set(res.certificate) == set(range(k))
