import numpy as np
import pytest
from sklearn.base import clone

from infoplan.bench import instances_csv, report_csv, run_instance, visits_for, worker_count
from infoplan.exceptions import NoFeasiblePath, NumericalError
from infoplan.planners import (
    ExactPlanner,
    PartitionPlanner,
    RelaxationPlanner,
    RoundingPlanner,
    make_planner,
)
from infoplan.problem import PlanningProblem, random_problem


@pytest.fixture(scope="module")
def problem():
    return random_problem(3, 3, 4, np.random.default_rng(17))


def test_params_and_clone():
    p = RoundingPlanner(n_rollouts=20, seed=3, reorder=True)
    params = p.get_params()
    assert params["n_rollouts"] == 20 and params["seed"] == 3 and params["reorder"] is True
    q = clone(p)
    assert q.get_params() == params and q is not p
    q.set_params(seed=4)
    assert q.seed == 4 and p.seed == 3


def test_fit_results(problem):
    ex = ExactPlanner().fit(problem)
    he = RoundingPlanner(n_rollouts=50).fit(problem)
    rel = RelaxationPlanner().fit(problem)
    assert he.lambda_ <= ex.lambda_ <= rel.lambda_ * (1 + 1e-6)
    assert ex.cost_ <= problem.budget * (1 + 1e-9) and he.cost_ <= problem.budget * (1 + 1e-9)
    assert rel.path_ is None and rel.cost_ is None
    assert ex.wall_time_ >= 0


def test_partition_planner_cycles(problem):
    pl = PartitionPlanner()
    period = pl.fit(problem).schedule_.period
    flights = [pl.path_.seq] + [pl.fit(problem).path_.seq for _ in range(2 * period - 1)]
    assert len(set(flights[:period])) == period
    assert flights[:period] == flights[period:2 * period]


def test_fit_validates_problem(problem):
    with pytest.raises(TypeError):
        ExactPlanner().fit("not a problem")
    with pytest.raises(NumericalError):
        ExactPlanner().fit(PlanningProblem(problem.graph, problem.model, -np.eye(9), problem.budget))
    with pytest.raises(ValueError):
        ExactPlanner().fit(problem.with_budget(-1.0))


def test_small_budget_is_infeasible(problem):
    tiny = problem.with_budget(1.0)
    for planner in (ExactPlanner(), RelaxationPlanner(), RoundingPlanner(n_rollouts=5)):
        with pytest.raises(NoFeasiblePath):
            planner.fit(tiny)


def test_make_planner():
    assert isinstance(make_planner("exact"), ExactPlanner)
    assert isinstance(make_planner("relax"), RelaxationPlanner)
    assert make_planner("heuristic", seed=7).seed == 7
    assert isinstance(make_planner("baseline"), PartitionPlanner)
    with pytest.raises(ValueError):
        make_planner("greedy")


def test_bench_instance_and_reports(monkeypatch):
    res = run_instance(3, 3, 0, seed=1, n_rollouts=20)
    assert res.lambda_exact is not None and res.delta >= 0
    again = run_instance(3, 3, 0, seed=1, n_rollouts=20)
    assert again.lambda_heuristic == res.lambda_heuristic
    skipped = run_instance(3, 3, 1, seed=1, n_rollouts=20, exact_max_areas=4)
    assert skipped.lambda_exact is None and skipped.delta is None
    assert instances_csv([res, skipped]).splitlines()[0].startswith("grid,index,")
    assert visits_for(4, 4) == 6 and visits_for(3, 3) >= 2
    monkeypatch.setenv("INFOPLAN_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("INFOPLAN_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()


def test_report_csv_blank_cells():
    from infoplan.bench import SizeReport

    text = report_csv([SizeReport(6, 6, 9, 2, None, None, 1.5, None)])
    assert text.splitlines()[1] == "6x6,9,2,,,1.5,"
