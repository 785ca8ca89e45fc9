"""Planning instances: graph, field model, prior covariance and budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import BeliefState, correct, predict
from .graph import MonitorGraph, build_grid
from .model import FieldModel, grid_field, selection_matrix

__all__ = ["PlanningProblem", "budget_for_visits", "advance_covariance", "random_problem"]


@dataclass(frozen=True)
class PlanningProblem:
    """Everything a planner needs to choose one flight."""

    graph: MonitorGraph
    model: FieldModel
    P_prior: np.ndarray
    budget: float

    def with_budget(self, budget: float) -> "PlanningProblem":
        return PlanningProblem(self.graph, self.model, self.P_prior, budget)


def budget_for_visits(g: MonitorGraph, visits: int) -> float:
    """Budget whose best-placed flight covers exactly ``visits`` areas.

    The cheapest depot round trip plus ``visits - 1`` sensing legs of the
    grid's cell time.
    """
    if g.cell_time is None:
        raise ValueError("budget_for_visits needs a grid graph")
    depot = float(np.min(g.times[0, 1:g.N + 1] + g.times[1:g.N + 1, g.end]))
    return depot + (visits - 1) * g.cell_time


def advance_covariance(P, model: FieldModel, hours: int, gamma_last=None) -> np.ndarray:
    """Covariance after ``hours`` predict steps with fixed-sensor updates in between.

    ``gamma_last`` (visit vector) is applied as a flight at the start. The
    result is a prior, i.e. the last step is a prediction.
    """
    belief = BeliefState(np.zeros(model.n_states), np.asarray(P, dtype=float), "posterior")
    no_visit = np.zeros(model.N, dtype=bool)
    if gamma_last is not None:
        prior = BeliefState(belief.x_hat, belief.P, "prior")
        sel = selection_matrix(model, gamma_last)
        belief = correct(prior, model, gamma_last, np.zeros(sel.M_k))
    m_fixed = selection_matrix(model, no_visit).M_k
    for h in range(hours):
        belief = predict(belief, model)
        if h == hours - 1:
            break
        belief = correct(belief, model, no_visit, np.zeros(m_fixed))
    return belief.P


def random_problem(rows: int, cols: int, visits: int, rng, cell_time: float = 30.0) -> PlanningProblem:
    """Random grid instance with a varied information distribution.

    Fixed sensors sit on a random handful of areas, mobile-sensor noise
    varies per area, and the prior comes from a 200 h burn-in with one
    random earlier flight followed by a 35-70 h gap.
    """
    rng = np.random.default_rng(rng)
    N = rows * cols
    n_fixed = int(rng.integers(1, max(1, N // 6) + 1))
    fixed = rng.choice(N, size=n_fixed, replace=False)
    mobile = rng.uniform(0.05, 0.2, size=N)
    model = grid_field(rows, cols, fixed_areas=fixed, mobile_variance=mobile)
    g = build_grid(rows, cols, cell_time=cell_time)
    P = advance_covariance(10.0 * np.eye(N), model, 200)
    past = np.zeros(N, dtype=bool)
    past[rng.choice(N, size=min(N, visits), replace=False)] = True
    P = advance_covariance(P, model, int(rng.integers(35, 71)), gamma_last=past)
    return PlanningProblem(g, model, P, budget_for_visits(g, visits))
