"""Kalman filtering with intermittent observations and the E-optimal objective.

Planning scores a visit vector by the smallest eigenvalue of the posterior
information matrix

    Y = P_prior^{-1} + sum_a fixed_a + sum_a gamma_a * mobile_a

which depends only on the prior covariance and on which areas are visited,
never on measured values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import NumericalError
from .linalg import jacobi_eigh, spd_inverse, symmetrize
from .model import FieldModel, _check_gamma, assemble_observation, selection_matrix

__all__ = [
    "BeliefState",
    "InfoMatrix",
    "InformationObjective",
    "predict",
    "correct",
    "information_matrix",
    "min_eigen",
    "objective",
    "covariance_trace",
]


@dataclass(frozen=True)
class BeliefState:
    x_hat: np.ndarray
    P: np.ndarray
    kind: str = "posterior"

    def __post_init__(self):
        if self.kind not in ("prior", "posterior"):
            raise ValueError(f"kind must be 'prior' or 'posterior', got {self.kind!r}")


@dataclass(frozen=True)
class InfoMatrix:
    """Information matrix with its smallest eigenpair."""

    Y: np.ndarray
    lambda_min: float
    v_min: np.ndarray


def _mat_vec(M, v, k):
    if v is None:
        return 0.0
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (M.shape[1],):
        raise ValueError(f"{k} has shape {v.shape}, expected ({M.shape[1]},)")
    return M @ v


def predict(belief: BeliefState, model: FieldModel, u=None, d=None) -> BeliefState:
    """Time update ``x <- A x + B u (+ B_d d)``, ``P <- A P A^T + Q``."""
    if belief.kind != "posterior":
        raise ValueError("predict expects a posterior belief")
    x = np.asarray(belief.x_hat, dtype=float)
    P = np.asarray(belief.P, dtype=float)
    if x.shape != (model.n_states,) or P.shape != (model.n_states, model.n_states):
        raise ValueError("belief dimensions do not match the model")
    x_new = model.A @ x + _mat_vec(model.B, u, "u")
    if d is not None:
        if model.B_disturbance is None:
            raise ValueError("model has no disturbance channel")
        x_new = x_new + _mat_vec(model.B_disturbance, d, "d")
    P_new = symmetrize(model.A @ P @ model.A.T + model.Q)
    return BeliefState(x_new, P_new, "prior")


def correct(belief: BeliefState, model: FieldModel, gamma, y) -> BeliefState:
    """Measurement update with the rows selected by ``gamma``.

    Uses the Joseph form ``(I - K C) P (I - K C)^T + K R K^T`` for the
    covariance. With no selected rows the belief passes through unchanged.
    """
    if belief.kind != "prior":
        raise ValueError("correct expects a prior belief")
    sel = selection_matrix(model, gamma)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (sel.M_k,):
        raise ValueError(f"expected {sel.M_k} measurements, got shape {y.shape}")
    if sel.M_k == 0:
        return BeliefState(belief.x_hat, belief.P, "posterior")
    C = assemble_observation(model)[sel.rows]
    r = model.noise_variances[sel.rows]
    P = belief.P
    PCt = P @ C.T
    S = symmetrize(C @ PCt + np.diag(r))
    try:
        cho = sla.cho_factor(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("innovation covariance is not invertible") from exc
    d = np.abs(np.diag(cho[0]))
    if d.min() <= 1e-8 * d.max():
        raise NumericalError("innovation covariance is singular within tolerance")
    K = sla.cho_solve(cho, PCt.T).T
    x = belief.x_hat + K @ (y - C @ belief.x_hat)
    IKC = np.eye(model.n_states) - K @ C
    P_post = symmetrize(IKC @ P @ IKC.T + (K * r) @ K.T)
    return BeliefState(x, P_post, "posterior")


def min_eigen(Y, method: str = "lapack"):
    """Smallest eigenvalue of a symmetric matrix and a unit eigenvector.

    ``method="jacobi"`` runs the cyclic Jacobi solver in :mod:`infoplan.linalg`;
    the default uses LAPACK's ``syevd``. Both return the eigenvector of the
    first sorted column when the smallest eigenvalue is repeated.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise ValueError("min_eigen expects a square matrix")
    if np.abs(Y - Y.T).max(initial=0.0) > 1e-10 * max(1.0, np.abs(Y).max(initial=0.0)):
        raise NumericalError("matrix is not symmetric")
    if method == "lapack":
        w, V = np.linalg.eigh(Y)
    elif method == "jacobi":
        w, V = jacobi_eigh(Y)
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    return float(w[0]), V[:, 0]


class InformationObjective:
    """Fast evaluator of ``gamma -> lambda_min(Y(gamma))`` for one prior.

    Precomputes ``P_prior^{-1}`` plus the fixed-sensor information once and
    memoises scores of integral visit sets by bitmask, so repeated calls from
    search and rounding are cheap.
    """

    def __init__(self, model: FieldModel, P_prior, method: str = "lapack"):
        self.model = model
        self.method = method
        self.P_inv = spd_inverse(P_prior, "prior covariance")
        self.Y_base = self.P_inv + model.fixed_info
        self.blocks = model.mobile_info_blocks
        self._cache: dict[int, float] = {}

    def matrix(self, gamma) -> np.ndarray:
        """``Y`` for a visit vector; fractional weights are allowed."""
        Y = self.Y_base.copy()
        n = self.model.n
        for a, g in enumerate(np.asarray(gamma, dtype=float)):
            if g:
                Y[a * n:(a + 1) * n, a * n:(a + 1) * n] += g * self.blocks[a]
        return Y

    def eig(self, gamma):
        return min_eigen(self.matrix(gamma), self.method)

    def __call__(self, gamma) -> float:
        gamma = np.asarray(gamma)
        if gamma.dtype == bool or np.all((gamma == 0) | (gamma == 1)):
            return self.of_mask(mask_of(gamma))
        return self.eig(gamma)[0]

    def of_mask(self, mask: int) -> float:
        val = self._cache.get(mask)
        if val is None:
            val = self.eig(gamma_of(mask, self.model.N))[0]
            self._cache[mask] = val
        return val

    def supergradient(self, gamma):
        """``(lambda_min, g)`` with ``g[a] = v^T mobile_a v`` for the min-eigenvector ``v``."""
        lam, v = self.eig(gamma)
        n = self.model.n
        g = np.array([v[a * n:(a + 1) * n] @ self.blocks[a] @ v[a * n:(a + 1) * n]
                      for a in range(self.model.N)])
        return lam, g


    def smoothed(self, gamma, mu: float):
        """Soft-min of the spectrum and its gradient in ``gamma``.

        ``f = lambda_1 - mu * log(sum_j exp(-(lambda_j - lambda_1) / mu))``
        is concave, smooth and within ``mu * log(dim)`` below ``lambda_min``.
        With ``mu == 0`` this is ``lambda_min`` with its eigenvector
        supergradient.

        Returns
        -------
        f_mu, lambda_min, grad
        """
        if mu <= 0:
            lam, g = self.supergradient(gamma)
            return lam, lam, g
        w, V = np.linalg.eigh(self.matrix(gamma))
        z = np.exp(-(w - w[0]) / mu)
        f = w[0] - mu * np.log(z.sum())
        z /= z.sum()
        n = self.model.n
        g = np.empty(self.model.N)
        for a in range(self.model.N):
            Va = V[a * n:(a + 1) * n]
            g[a] = np.sum((self.blocks[a] @ Va) * Va, axis=0) @ z
        return float(f), float(w[0]), g

    def smoothed_value(self, Y, mu: float) -> float:
        w = np.linalg.eigvalsh(Y)
        if mu <= 0:
            return float(w[0])
        return float(w[0] - mu * np.log(np.sum(np.exp(-(w - w[0]) / mu))))


def mask_of(gamma) -> int:
    mask = 0
    for a, g in enumerate(np.asarray(gamma)):
        if g:
            mask |= 1 << a
    return mask


def gamma_of(mask: int, N: int) -> np.ndarray:
    return np.array([(mask >> a) & 1 for a in range(N)], dtype=bool)


def information_matrix(P_prior, model: FieldModel, gamma, method: str = "lapack") -> InfoMatrix:
    """Posterior information matrix for visit vector ``gamma``."""
    gamma = _check_gamma(model, gamma)
    obj = InformationObjective(model, P_prior, method)
    Y = obj.matrix(gamma)
    lam, v = min_eigen(Y, method)
    return InfoMatrix(Y, lam, v)


def objective(P_prior, model: FieldModel, gamma, method: str = "lapack") -> float:
    """``lambda_min`` of the posterior information matrix."""
    gamma = _check_gamma(model, gamma)
    return InformationObjective(model, P_prior, method)(gamma)


def covariance_trace(P) -> float:
    """Trace of a covariance matrix; reported alongside the planning metric, never optimised."""
    return float(np.trace(P))
