import itertools

import numpy as np
import pytest

from infoplan.exceptions import Infeasible
from infoplan.lp import LinearProgram, SimplexSolver, make_solver, solve_lp


def vertex_oracle(lp):
    """Best objective over all basic solutions, by brute-force enumeration.

    Every vertex of ``A_ub x <= b_ub, A_eq x = b_eq, lb <= x <= ub`` solves
    ``n`` linearly independent tight constraints; try each subset.
    """
    n = lp.n_vars
    rows = [(lp.A_eq[k], lp.b_eq[k]) for k in range(lp.A_eq.shape[0])]
    ineq = [(lp.A_ub[k], lp.b_ub[k]) for k in range(lp.A_ub.shape[0])]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        ineq += [(e, lp.ub[i]), (e, lp.lb[i])]
    need = n - len(rows)
    best = None
    for subset in itertools.combinations(range(len(ineq)), need):
        A = np.array([r for r, _ in rows] + [ineq[k][0] for k in subset]).reshape(-1, n)
        b = np.array([v for _, v in rows] + [ineq[k][1] for k in subset])
        if A.shape[0] != n or abs(np.linalg.det(A)) < 1e-10:
            continue
        x = np.linalg.solve(A, b)
        if lp.is_feasible(x, tol=1e-9):
            val = float(lp.c @ x)
            if best is None or val > best:
                best = val
    return best


def test_box_example():
    res = solve_lp(LinearProgram(c=[1.0, 1.0]))
    np.testing.assert_allclose(res.x, [1.0, 1.0])
    assert res.value == pytest.approx(2.0)


def test_single_cut_example():
    res = solve_lp(LinearProgram(c=[1.0], A_ub=[[1.0]], b_ub=[0.3]))
    assert res.x[0] == pytest.approx(0.3)


@pytest.mark.parametrize("pivot_rule", ["bland", "dantzig"])
def test_random_lps_match_vertex_enumeration(pivot_rule):
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 50:
        n = int(rng.integers(1, 7))
        m = int(rng.integers(0, 5))
        k = int(rng.integers(0, min(2, n)))
        lp = LinearProgram(
            c=rng.standard_normal(n),
            A_ub=rng.standard_normal((m, n)) if m else None,
            b_ub=rng.uniform(-0.5, 2.0, m) if m else None,
            A_eq=rng.standard_normal((k, n)) if k else None,
            b_eq=rng.uniform(-0.3, 0.3, k) if k else None,
            lb=rng.uniform(-1.0, 0.0, n), ub=rng.uniform(0.5, 2.0, n))
        oracle = vertex_oracle(lp)
        if oracle is None:
            with pytest.raises(Infeasible):
                solve_lp(lp, pivot_rule)
            continue
        res = solve_lp(lp, pivot_rule)
        assert lp.is_feasible(res.x)
        assert res.value == pytest.approx(oracle, rel=1e-8, abs=1e-8)
        checked += 1


def test_infeasible_reports_row():
    lp = LinearProgram(c=[1.0, 1.0], A_ub=[[1.0, 0.0], [-1.0, -1.0]], b_ub=[1.0, -3.0])
    with pytest.raises(Infeasible) as info:
        solve_lp(lp)
    assert info.value.row == 1


def test_degenerate_lp_terminates():
    # many redundant constraints through the same vertex
    n = 4
    A = np.vstack([np.eye(n), np.ones((1, n)), np.ones((1, n)), np.tril(np.ones((n, n)))])
    b = np.concatenate([np.zeros(n), [0.0, 0.0], np.zeros(n)])
    res = solve_lp(LinearProgram(c=np.ones(n), A_ub=A, b_ub=b))
    assert res.value == pytest.approx(0.0, abs=1e-12)


def test_warm_start_and_added_rows():
    rng = np.random.default_rng(3)
    n = 5
    lp = LinearProgram(c=np.zeros(n), A_ub=rng.standard_normal((3, n)), b_ub=np.ones(3),
                       A_eq=np.ones((1, n)), b_eq=[1.5])
    for backend in ("simplex", "highs"):
        solver = make_solver(lp, backend)
        for _ in range(5):
            c = rng.standard_normal(n)
            fresh = solve_lp(LinearProgram(c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq))
            assert solver.maximize(c).value == pytest.approx(fresh.value, abs=1e-8)
        cut = np.array([[1.0, 1.0, 0.0, 0.0, 0.0]])
        solver.add_rows(cut, [0.4])
        c = rng.standard_normal(n)
        res = solver.maximize(c)
        oracle = solve_lp(LinearProgram(c, np.vstack([lp.A_ub, cut]), np.append(lp.b_ub, 0.4),
                                        lp.A_eq, lp.b_eq))
        assert res.x[0] + res.x[1] <= 0.4 + 1e-8
        assert res.value == pytest.approx(oracle.value, abs=1e-8)


def test_input_validation():
    with pytest.raises(ValueError):
        LinearProgram(c=[1.0], lb=[-np.inf])
    with pytest.raises(ValueError):
        LinearProgram(c=[1.0], lb=[1.0], ub=[0.0])
    with pytest.raises(ValueError):
        LinearProgram(c=[1.0, 2.0], A_ub=[[1.0]], b_ub=[1.0])
    with pytest.raises(ValueError):
        SimplexSolver(LinearProgram(c=[1.0]), pivot_rule="steepest")
    with pytest.raises(ValueError):
        make_solver(LinearProgram(c=[1.0]), backend="glpk")
