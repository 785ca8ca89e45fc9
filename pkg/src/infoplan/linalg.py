"""Small dense linear-algebra kernels."""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla

from .exceptions import NumericalError

__all__ = ["jacobi_eigh", "spd_inverse", "symmetrize"]


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every off-diagonal pair in row order, annihilating each
    entry with a plane rotation, until the largest off-diagonal magnitude is
    at most ``tol``. ``tol`` is raised to a few ulps of ``||A||_F`` when the
    requested value is below what double precision can resolve.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    V : ndarray
        Matching orthonormal eigenvectors as columns.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    V = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), V
    tol = max(tol, 8 * np.finfo(float).eps * np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(a.diagonal())).max()
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def spd_inverse(P, what: str = "matrix") -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix via Cholesky."""
    P = np.asarray(P, dtype=float)
    try:
        cho = sla.cho_factor(P, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"{what} is not positive definite") from exc
    diag = np.abs(np.diag(cho[0]))
    if diag.min() <= 1e-8 * max(diag.max(), 1e-300):
        raise NumericalError(f"{what} is singular within tolerance")
    return symmetrize(sla.cho_solve(cho, np.eye(P.shape[0])))
