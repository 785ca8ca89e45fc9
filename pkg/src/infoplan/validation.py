"""Input checks shared by the planners and the simulator."""

from __future__ import annotations

import numpy as np

from .exceptions import NumericalError
from .problem import PlanningProblem

__all__ = ["check_problem", "check_covariance", "check_budget"]


def check_covariance(P, n: int, what: str = "prior covariance") -> np.ndarray:
    """Return ``P`` as a float array after checking shape, symmetry and definiteness."""
    P = np.asarray(P, dtype=float)
    if P.shape != (n, n):
        raise ValueError(f"{what} has shape {P.shape}, expected ({n}, {n})")
    if not np.all(np.isfinite(P)):
        raise NumericalError(f"{what} has non-finite entries")
    scale = max(1.0, float(np.abs(P).max()))
    if np.abs(P - P.T).max() > 1e-9 * scale:
        raise NumericalError(f"{what} is not symmetric")
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NumericalError(f"{what} is not positive definite") from None
    return P


def check_budget(budget) -> float:
    budget = float(budget)
    if not np.isfinite(budget) or budget <= 0:
        raise ValueError(f"budget must be a positive number of seconds, got {budget}")
    return budget


def check_problem(problem) -> PlanningProblem:
    """Validate a :class:`PlanningProblem` and return it unchanged."""
    if not isinstance(problem, PlanningProblem):
        raise TypeError(f"expected a PlanningProblem, got {type(problem).__name__}")
    if problem.graph.N != problem.model.N:
        raise ValueError(f"graph has {problem.graph.N} areas but the model has {problem.model.N}")
    check_covariance(problem.P_prior, problem.model.n_states)
    check_budget(problem.budget)
    return problem
