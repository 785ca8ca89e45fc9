"""Dense tableau simplex for small boxed linear programs.

Every variable carries finite bounds, so every program is bounded and
only infeasibility can stop a solve. Variables are shifted to
``0 <= y <= ub - lb`` and the upper bounds become explicit rows. Phase 1
drives artificial variables out. Phase 2 maximises the objective from the
resulting basis.

:class:`SimplexSolver` keeps the feasible tableau between solves, so a
sequence of objectives over one polytope (the Frank-Wolfe pattern) pays
for phase 1 only once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import Infeasible

__all__ = ["LinearProgram", "LPResult", "SimplexSolver", "HighsSolver", "make_solver", "solve_lp"]

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEAS_TOL = 1e-8


@dataclass
class LinearProgram:
    """``max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub``."""

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = self._rows(self.A_ub, self.b_ub, n)
        self.A_eq, self.b_eq = self._rows(self.A_eq, self.b_eq, n)
        self.lb = np.zeros(n) if self.lb is None else np.broadcast_to(np.asarray(self.lb, float), (n,)).copy()
        self.ub = np.ones(n) if self.ub is None else np.broadcast_to(np.asarray(self.ub, float), (n,)).copy()
        if not (np.all(np.isfinite(self.lb)) and np.all(np.isfinite(self.ub))):
            raise ValueError("all variables must have finite bounds")
        if np.any(self.lb > self.ub):
            raise ValueError("a lower bound exceeds its upper bound")

    @staticmethod
    def _rows(A, b, n):
        if A is None:
            return np.zeros((0, n)), np.zeros(0)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape != (b.size, n):
            raise ValueError(f"constraint block has shape {A.shape}, expected ({b.size}, {n})")
        return A, b

    @property
    def n_vars(self) -> int:
        return self.c.size

    def is_feasible(self, x, tol: float = 1e-7) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= self.lb - tol) and np.all(x <= self.ub + tol)
            and np.all(self.A_ub @ x <= self.b_ub + tol)
            and np.all(np.abs(self.A_eq @ x - self.b_eq) <= tol))


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    pivots: int


class SimplexSolver:
    """Phase-1 feasible tableau for one polytope, re-optimisable for new objectives.

    Parameters
    ----------
    lp : LinearProgram
        Only its constraints and bounds are used at construction.
    pivot_rule : {"bland", "dantzig"}
        ``"bland"`` picks the lowest-index improving column and breaks ratio
        ties by lowest basic index, which cannot cycle. ``"dantzig"`` picks
        the most improving column and falls back to Bland's rule after a run
        of degenerate pivots.
    """

    REFACTOR_EVERY = 150
    DEGENERATE_RUN = 50

    def __init__(self, lp: LinearProgram, pivot_rule: str = "bland"):
        if pivot_rule not in ("bland", "dantzig"):
            raise ValueError(f"unknown pivot rule {pivot_rule!r}")
        self.lp = lp
        self.pivot_rule = pivot_rule
        self.pivots = 0
        self._since_refactor = 0
        n = lp.n_vars
        m_ub, m_eq = lp.A_ub.shape[0], lp.A_eq.shape[0]
        width = lp.ub - lp.lb
        # rows: inequalities, equalities, upper bounds
        A = np.zeros((m_ub + m_eq + n, n + m_ub + n))
        b = np.zeros(m_ub + m_eq + n)
        A[:m_ub, :n] = lp.A_ub
        A[:m_ub, n:n + m_ub] = np.eye(m_ub)
        b[:m_ub] = lp.b_ub - lp.A_ub @ lp.lb
        A[m_ub:m_ub + m_eq, :n] = lp.A_eq
        b[m_ub:m_ub + m_eq] = lp.b_eq - lp.A_eq @ lp.lb
        A[m_ub + m_eq:, :n] = np.eye(n)
        A[m_ub + m_eq:, n + m_ub:] = np.eye(n)
        b[m_ub + m_eq:] = width
        neg = b < 0
        A[neg] *= -1
        b[neg] *= -1
        m = A.shape[0]
        basis = np.full(m, -1)
        slack_rows = np.r_[np.arange(m_ub), np.arange(m_ub + m_eq, m)]
        slack_cols = np.r_[n + np.arange(m_ub), n + m_ub + np.arange(n)]
        for r, col in zip(slack_rows, slack_cols):
            if not neg[r]:
                basis[r] = col
        art_rows = np.flatnonzero(basis < 0)
        n_real = A.shape[1]
        A = np.hstack([A, np.zeros((m, art_rows.size))])
        for k, r in enumerate(art_rows):
            A[r, n_real + k] = 1.0
            basis[r] = n_real + k
        self._n, self._n_real = n, n_real
        self._A, self._b = A, b
        self._basis = basis
        self._row_origin = np.arange(m)  # original row index of each tableau row
        self.T = np.hstack([A, b[:, None]])
        if art_rows.size:
            self._phase1(art_rows)
        self.T = np.delete(self.T, np.s_[n_real:n_real + art_rows.size], axis=1)
        self._A = self._A[:, :n_real]

    def _reduced_costs(self, c_full):
        return c_full - c_full[self._basis] @ self.T[:, :-1]

    def _pivot(self, r, k):
        T = self.T
        T[r] /= T[r, k]
        col = T[:, k].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, k] = 0.0
        T[r, k] = 1.0
        self._basis[r] = k
        self.pivots += 1
        self._since_refactor += 1

    def _refactor(self):
        """Recompute the tableau from the original rows and the current basis."""
        A, b = self._A[self._row_origin], self._b[self._row_origin]
        B = A[:, self._basis]
        self.T = np.linalg.solve(B, np.hstack([A, b[:, None]]))
        self.T[:, -1] = np.maximum(self.T[:, -1], 0.0)
        self._since_refactor = 0

    def _iterate(self, c_full):
        """Primal simplex from the current feasible basis; returns pivots taken."""
        start = self.pivots
        d = self._reduced_costs(c_full)
        degenerate = 0
        while True:
            candidates = np.flatnonzero(d > COST_TOL)
            if candidates.size == 0:
                return self.pivots - start
            if self.pivot_rule == "bland" or degenerate >= self.DEGENERATE_RUN:
                k = candidates[0]
            else:
                k = candidates[np.argmax(d[candidates])]
            col = self.T[:, k]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                raise RuntimeError("linear program is unbounded despite finite bounds")
            ratios = self.T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = tied[np.argmin(self._basis[tied])]
            degenerate = degenerate + 1 if self.T[r, -1] <= PIVOT_TOL else 0
            self._pivot(r, k)
            if self._since_refactor >= self.REFACTOR_EVERY:
                self._refactor()
                d = self._reduced_costs(c_full)
            else:
                d = d - d[k] * self.T[r, :-1]
                d[k] = 0.0

    def _phase1(self, art_rows):
        n_real = self._n_real
        c1 = np.zeros(self.T.shape[1] - 1)
        c1[n_real:] = -1.0
        self._iterate(c1)
        value = c1[self._basis] @ self.T[:, -1]
        if value < -FEAS_TOL * max(1.0, np.abs(self._b).max()):
            offending = [r for r in range(len(self._basis))
                         if self._basis[r] >= n_real and self.T[r, -1] > FEAS_TOL]
            row = int(self._row_origin[offending[0]]) if offending else None
            raise Infeasible("linear program is infeasible", row=row)
        # pivot remaining zero-level artificials out, dropping redundant rows
        r = 0
        while r < len(self._basis):
            if self._basis[r] >= n_real:
                nz = np.flatnonzero(np.abs(self.T[r, :n_real]) > PIVOT_TOL)
                if nz.size:
                    self._pivot(r, nz[0])
                else:
                    self.T = np.delete(self.T, r, axis=0)
                    self._basis = np.delete(self._basis, r)
                    self._row_origin = np.delete(self._row_origin, r)
                    continue
            r += 1

    def add_rows(self, A, b) -> None:
        """Append inequality rows ``A x <= b``; the tableau is rebuilt."""
        lp = self.lp
        A = np.atleast_2d(np.asarray(A, dtype=float))
        self.__init__(LinearProgram(lp.c, np.vstack([lp.A_ub, A]), np.r_[lp.b_ub, b],
                                    lp.A_eq, lp.b_eq, lp.lb, lp.ub, lp.names), self.pivot_rule)

    def maximize(self, c) -> LPResult:
        """Optimal vertex for objective ``c`` starting from the stored basis."""
        c = np.asarray(c, dtype=float).ravel()
        if c.size != self._n:
            raise ValueError(f"objective has {c.size} entries, expected {self._n}")
        c_full = np.zeros(self.T.shape[1] - 1)
        c_full[:self._n] = c
        start = self.pivots
        self._iterate(c_full)
        y = np.zeros(self.T.shape[1] - 1)
        y[self._basis] = self.T[:, -1]
        x = self.lp.lb + np.clip(y[:self._n], 0.0, self.lp.ub - self.lp.lb)
        return LPResult(x, float(c @ x), self.pivots - start)


class HighsSolver:
    """Same interface as :class:`SimplexSolver`, backed by HiGHS.

    The model is loaded once; each :meth:`maximize` only swaps the costs,
    so HiGHS warm-starts from the previous basis. Solutions are basic, so
    Frank-Wolfe still moves toward vertices.
    """

    def __init__(self, lp: LinearProgram):
        import highspy
        import scipy.sparse as sp

        self.lp = lp
        self.pivots = 0
        self._highspy = highspy
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        n = lp.n_vars
        h.addVars(n, lp.lb, lp.ub)
        A = np.vstack([lp.A_ub, lp.A_eq])
        if A.shape[0]:
            inf = highspy.kHighsInf
            lo = np.r_[np.full(lp.b_ub.size, -inf), lp.b_eq]
            hi = np.r_[lp.b_ub, lp.b_eq]
            M = sp.csr_matrix(A)
            h.addRows(A.shape[0], lo, hi, M.nnz, M.indptr[:-1].astype(np.int32),
                      M.indices.astype(np.int32), M.data)
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        self._h = h
        self._cols = np.arange(n, dtype=np.int32)
        self._run(np.zeros(n))

    def _run(self, c):
        h = self._h
        h.changeColsCost(c.size, self._cols, c)
        h.run()
        status = h.getModelStatus()
        ms = self._highspy.HighsModelStatus
        if status == ms.kInfeasible:
            raise Infeasible("linear program is infeasible")
        if status != ms.kOptimal:
            raise RuntimeError(f"HiGHS stopped with status {h.modelStatusToString(status)}")
        info = h.getInfo()
        self.pivots += int(info.simplex_iteration_count)
        return np.array(h.getSolution().col_value)

    def add_rows(self, A, b) -> None:
        """Append inequality rows ``A x <= b``."""
        import scipy.sparse as sp

        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        M = sp.csr_matrix(A)
        self._h.addRows(A.shape[0], np.full(b.size, -self._highspy.kHighsInf), b, M.nnz,
                        M.indptr[:-1].astype(np.int32), M.indices.astype(np.int32), M.data)
        lp = self.lp
        self.lp = LinearProgram(lp.c, np.vstack([lp.A_ub, A]), np.r_[lp.b_ub, b],
                                lp.A_eq, lp.b_eq, lp.lb, lp.ub, lp.names)

    def maximize(self, c) -> LPResult:
        c = np.asarray(c, dtype=float).ravel()
        before = self.pivots
        x = np.clip(self._run(c), self.lp.lb, self.lp.ub)
        return LPResult(x, float(c @ x), self.pivots - before)


def make_solver(lp: LinearProgram, backend: str = "simplex", pivot_rule: str = "bland"):
    """Warm-startable solver for repeated objectives over ``lp``'s polytope."""
    if backend == "simplex":
        return SimplexSolver(lp, pivot_rule)
    if backend == "highs":
        return HighsSolver(lp)
    raise ValueError(f"unknown LP backend {backend!r}")


def solve_lp(lp: LinearProgram, pivot_rule: str = "bland") -> LPResult:
    """Optimal basic feasible solution of ``lp``.

    Raises
    ------
    Infeasible
        When the constraints admit no point; ``row`` identifies a violated
        constraint (inequalities first, then equalities).
    """
    return SimplexSolver(lp, pivot_rule).maximize(lp.c)
