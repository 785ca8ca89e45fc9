"""Budget-constrained flight planning that maximises the smallest eigenvalue
of a Kalman-filter information matrix over a gridded field."""

from .baseline import PartitionSchedule, build_partitions, next_flight
from .estimator import BeliefState, correct, information_matrix, min_eigen, objective, predict
from .exact import MisdpEncoding, export_misdp, solve_exact
from .exceptions import (
    Infeasible,
    InfoplanError,
    InstanceTooLarge,
    NoFeasiblePath,
    NumericalError,
    ScenarioError,
)
from .graph import MonitorGraph, Path, build_grid, is_feasible, make_path, visit_vector
from .heuristic import RoundingConfig, degradation, randomized_rounding, reorder_path, rollout
from .lp import LinearProgram, solve_lp
from .model import AreaSensing, FieldModel, grid_field, selection_matrix
from .planners import ExactPlanner, PartitionPlanner, RelaxationPlanner, RoundingPlanner
from .problem import PlanningProblem, random_problem
from .relaxation import RelaxedSolution, build_relaxed_polytope, solve_relaxation
from .simulator import ScenarioConfig, SimTrace, ratio_metric, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AreaSensing", "BeliefState", "ExactPlanner", "FieldModel", "Infeasible", "InfoplanError",
    "InstanceTooLarge", "LinearProgram", "MisdpEncoding", "MonitorGraph", "NoFeasiblePath",
    "NumericalError", "PartitionPlanner", "PartitionSchedule", "Path", "PlanningProblem",
    "RelaxationPlanner", "RelaxedSolution", "RoundingConfig", "RoundingPlanner", "ScenarioConfig",
    "ScenarioError", "SimTrace", "build_grid", "build_partitions", "build_relaxed_polytope",
    "correct", "degradation", "export_misdp", "grid_field", "information_matrix", "is_feasible",
    "make_path", "min_eigen", "next_flight", "objective", "predict", "random_problem",
    "randomized_rounding", "ratio_metric", "reorder_path", "rollout", "run_scenario",
    "selection_matrix", "solve_exact", "solve_lp", "solve_relaxation", "visit_vector",
]
