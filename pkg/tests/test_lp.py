import numpy as np
import pytest
from scipy.optimize import linprog

from reachspan.polytope.lp import HighsProgram, LinearProgram, LPStatus, make_program, solve_lp


def _box(n, half=1.0):
    return np.vstack([np.eye(n), -np.eye(n)]), np.full(2 * n, half)


def test_box_optimum():
    A, b = _box(3)
    result = solve_lp(np.array([1.0, -2.0, 0.5]), A, b)
    assert result.status is LPStatus.OPTIMAL
    np.testing.assert_allclose(result.x, [1.0, -1.0, 1.0], atol=1e-9)
    assert result.value == pytest.approx(3.5)


def test_active_rows_are_original_indices():
    A, b = _box(2)
    result = solve_lp(np.array([1.0, 1.0]), A, b)
    assert sorted(result.active) == [0, 1]


def test_infeasible():
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    b = np.array([-1.0, -1.0, 1.0, 1.0])  # x <= -1 and x >= 1
    assert solve_lp(np.array([1.0, 0.0]), A, b).status is LPStatus.INFEASIBLE


def test_unbounded():
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0, 1.0, 0.0])
    assert solve_lp(np.array([0.0, 1.0]), A, b).status is LPStatus.UNBOUNDED


def test_phase_one_from_infeasible_origin():
    # box [2, 3] x [-4, -1] excludes the origin
    A, _ = _box(2)
    b = np.array([3.0, -1.0, -2.0, 4.0])
    result = solve_lp(np.array([-1.0, 1.0]), A, b)
    assert result.status is LPStatus.OPTIMAL
    np.testing.assert_allclose(result.x, [2.0, -1.0], atol=1e-9)


def test_redundant_and_degenerate_rows():
    A, b = _box(2)
    A = np.vstack([A, A, [[1.0, 1.0]], [[0.0, 0.0]]])
    b = np.concatenate([b, b, [2.0], [0.0]])
    result = solve_lp(np.array([1.0, 1.0]), A, b)
    assert result.status is LPStatus.OPTIMAL
    assert result.value == pytest.approx(2.0)


def test_equality_pair_reduces_dimension():
    # x + y = 1 held by two opposite rows, plus the unit box
    A, b = _box(2)
    A = np.vstack([A, [[1.0, 1.0], [-1.0, -1.0]]])
    b = np.concatenate([b, [1.0, -1.0]])
    result = solve_lp(np.array([1.0, 0.0]), A, b)
    assert result.status is LPStatus.OPTIMAL
    np.testing.assert_allclose(result.x, [1.0, 0.0], atol=1e-9)


def test_variables_outside_row_space():
    # only x is constrained: maximising y is unbounded, maximising x is not
    A = np.array([[1.0, 0.0], [-1.0, 0.0]])
    b = np.array([1.0, 1.0])
    assert solve_lp(np.array([0.0, 1.0]), A, b).status is LPStatus.UNBOUNDED
    result = solve_lp(np.array([2.0, 0.0]), A, b)
    assert result.status is LPStatus.OPTIMAL
    assert result.value == pytest.approx(2.0)


def test_matches_highs_on_random_polytopes(rng):
    for _ in range(30):
        n = int(rng.integers(2, 8))
        rows = int(rng.integers(n + 1, 4 * n))
        A = rng.standard_normal((rows, n))
        A = np.vstack([A, np.eye(n), -np.eye(n)])
        b = np.concatenate([rng.uniform(0.1, 2.0, rows), np.full(2 * n, 5.0)])
        c = rng.standard_normal(n)
        ours = solve_lp(c, A, b, backend="simplex")
        reference = linprog(-c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
        assert ours.status is LPStatus.OPTIMAL
        assert ours.value == pytest.approx(-reference.fun, abs=1e-7)
        assert np.all(A @ ours.x <= b + 1e-7)


def test_warm_start_reaches_same_optimum(rng):
    n = 5
    A = np.vstack([rng.standard_normal((12, n)), np.eye(n), -np.eye(n)])
    b = np.concatenate([rng.uniform(0.5, 1.5, 12), np.full(2 * n, 3.0)])
    program = LinearProgram(A, b)
    first = program.maximize(rng.standard_normal(n))
    c = rng.standard_normal(n)
    cold = program.maximize(c)
    warm = program.maximize(c, start=first.active)
    assert warm.value == pytest.approx(cold.value, abs=1e-9)


def test_bogus_warm_start_falls_back():
    A, b = _box(2)
    program = LinearProgram(A, b)
    result = program.maximize(np.array([1.0, 1.0]), start=(0, 2))  # x <= 1 and -x <= 1 are parallel
    assert result.status is LPStatus.OPTIMAL
    assert result.value == pytest.approx(2.0)


def test_backends_agree():
    A, b = _box(3, half=2.0)
    c = np.array([0.3, -1.0, 2.0])
    simplex = make_program(A, b, "simplex").maximize(c)
    highs = make_program(A, b, "highs").maximize(c)
    assert isinstance(make_program(A, b, "highs"), HighsProgram)
    assert simplex.value == pytest.approx(highs.value, abs=1e-9)


def test_shape_checks():
    with pytest.raises(ValueError):
        LinearProgram(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        LinearProgram(np.eye(2), np.ones(2)).maximize(np.ones(3))
