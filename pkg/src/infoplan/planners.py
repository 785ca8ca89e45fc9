"""Estimator-style front end for the planners.

Each planner is configured through constructor parameters (so ``get_params``,
``set_params`` and ``clone`` work) and solves one :class:`PlanningProblem`
per :meth:`fit` call. Results land in trailing-underscore attributes.
"""

from __future__ import annotations

import time

from sklearn.base import BaseEstimator

from .baseline import build_partitions, next_flight
from .estimator import objective
from .exact import max_visits, solve_exact
from .exceptions import NoFeasiblePath
from .graph import visit_vector
from .heuristic import RoundingConfig, randomized_rounding
from .relaxation import solve_relaxation
from .validation import check_problem

__all__ = ["ExactPlanner", "RelaxationPlanner", "RoundingPlanner", "PartitionPlanner", "make_planner"]


class _Planner(BaseEstimator):
    """Shared bookkeeping: timing and the ``path_`` / ``lambda_`` pair."""

    def fit(self, problem):
        check_problem(problem)
        t0 = time.perf_counter()
        self._solve(problem)
        self.wall_time_ = time.perf_counter() - t0
        return self

    def _solve(self, problem):
        raise NotImplementedError

    @property
    def cost_(self) -> float:
        return self.path_.cost


class ExactPlanner(_Planner):
    """Optimal flight by bounded enumeration.

    Parameters
    ----------
    max_areas : int
        Refuse graphs with more areas.
    max_visit_count : int
        Refuse budgets admitting longer flights.
    """

    def __init__(self, max_areas: int = 40, max_visit_count: int = 12):
        self.max_areas = max_areas
        self.max_visit_count = max_visit_count

    def _solve(self, problem):
        self.path_, self.lambda_ = solve_exact(
            problem.graph, problem.model, problem.P_prior, problem.budget,
            max_areas=self.max_areas, max_visit_count=self.max_visit_count)


class RelaxationPlanner(_Planner):
    """Relaxed flight only; ``lambda_`` is the relaxed value and there is no path."""

    def __init__(self, max_iters: int = 500, tol=None, smoothing: float = 1e-2,
                 lp_backend: str = "highs", cuts: bool = True):
        self.max_iters = max_iters
        self.tol = tol
        self.smoothing = smoothing
        self.lp_backend = lp_backend
        self.cuts = cuts

    def _relax(self, problem):
        if max_visits(problem.graph, problem.budget) == 0:
            raise NoFeasiblePath(f"no single-area flight fits the budget {problem.budget:g} s")
        return solve_relaxation(
            problem.graph, problem.model, problem.P_prior, problem.budget,
            tol=self.tol, max_iters=self.max_iters, smoothing=self.smoothing,
            lp_backend=self.lp_backend, cuts=self.cuts)

    def _solve(self, problem):
        self.relaxed_ = self._relax(problem)
        self.lambda_ = self.relaxed_.alpha_r
        self.path_ = None

    @property
    def cost_(self):
        return None


class RoundingPlanner(RelaxationPlanner):
    """Relaxation followed by best-of-``n_rollouts`` randomized rounding."""

    def __init__(self, n_rollouts: int = 500, seed: int = 0, reorder: bool = False,
                 max_iters: int = 500, tol=None, smoothing: float = 1e-2,
                 lp_backend: str = "highs", cuts: bool = True):
        super().__init__(max_iters=max_iters, tol=tol, smoothing=smoothing,
                         lp_backend=lp_backend, cuts=cuts)
        self.n_rollouts = n_rollouts
        self.seed = seed
        self.reorder = reorder

    def _solve(self, problem):
        self.relaxed_ = self._relax(problem)
        cfg = RoundingConfig(L=self.n_rollouts, seed=self.seed, allow_reorder=self.reorder)
        self.path_, self.lambda_ = randomized_rounding(
            self.relaxed_, problem.graph, problem.model, problem.P_prior, problem.budget, cfg)

    @property
    def cost_(self):
        return self.path_.cost


class PartitionPlanner(_Planner):
    """Round-robin block sweeps.

    The schedule is built on the first :meth:`fit` and reused while the graph
    and budget stay the same, so consecutive fits cycle through the blocks.
    """

    def __init__(self):
        pass

    def _solve(self, problem):
        key = (id(problem.graph), problem.budget)
        if getattr(self, "_key", None) != key:
            self.schedule_ = build_partitions(problem.graph, problem.budget)
            self._key = key
        self.path_ = next_flight(self.schedule_)
        self.lambda_ = objective(problem.P_prior, problem.model, visit_vector(self.path_, problem.graph.N))


def make_planner(method: str, seed: int = 0, n_rollouts: int = 500, reorder: bool = False,
                 max_iters: int = 500):
    """Planner for a method name: ``exact``, ``relax``, ``heuristic`` or ``baseline``."""
    if method == "exact":
        return ExactPlanner()
    if method == "relax":
        return RelaxationPlanner(max_iters=max_iters)
    if method == "heuristic":
        return RoundingPlanner(n_rollouts=n_rollouts, seed=seed, reorder=reorder, max_iters=max_iters)
    if method == "baseline":
        return PartitionPlanner()
    raise ValueError(f"unknown method {method!r}")
