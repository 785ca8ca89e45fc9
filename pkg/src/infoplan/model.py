"""Linear field model, per-area sensing structure and measurement selection.

The monitored field is a discrete LTI system over ``N`` areas with ``n``
states each. Every area owns ``f_i`` fixed-sensor outputs, which are always
measured, and ``m_i`` mobile-sensor outputs, which are measured only when the
vehicle visits the area. Areas are indexed ``0..N-1`` here; on the monitoring
graph area ``a`` is vertex ``a + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "AreaSensing",
    "FieldModel",
    "SelectionMatrix",
    "assemble_observation",
    "selection_matrix",
    "info_term",
    "grid_adjacency",
    "grid_field",
]


def _as_rows(mat, n_cols):
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return np.zeros((0, n_cols))
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    return mat


@dataclass(frozen=True)
class AreaSensing:
    """Measurement structure of a single area.

    Parameters
    ----------
    C_fixed : array of shape (f, n)
        Rows measured by fixed sensors on every step.
    C_mobile : array of shape (m, n)
        Rows measured only when the area is visited.
    r_fixed, r_mobile : array-like of positive floats
        Measurement noise variances for the fixed and mobile rows.
    """

    C_fixed: np.ndarray
    C_mobile: np.ndarray
    r_fixed: np.ndarray
    r_mobile: np.ndarray

    def __post_init__(self):
        C_mobile = np.asarray(self.C_mobile, dtype=float)
        n = C_mobile.shape[-1] if C_mobile.size else np.asarray(self.C_fixed).shape[-1]
        object.__setattr__(self, "C_fixed", _as_rows(self.C_fixed, n))
        object.__setattr__(self, "C_mobile", _as_rows(C_mobile, n))
        object.__setattr__(self, "r_fixed", np.atleast_1d(np.asarray(self.r_fixed, dtype=float)).ravel())
        object.__setattr__(self, "r_mobile", np.atleast_1d(np.asarray(self.r_mobile, dtype=float)).ravel())
        if self.C_fixed.shape[1] != self.C_mobile.shape[1]:
            raise ValueError("fixed and mobile measurement matrices disagree on n")
        if self.r_fixed.shape[0] != self.f or self.r_mobile.shape[0] != self.m:
            raise ValueError("one noise variance is required per measurement row")
        if np.any(self.r_fixed <= 0) or np.any(self.r_mobile <= 0):
            raise ValueError("measurement noise variances must be strictly positive")

    @property
    def n_states(self) -> int:
        return self.C_mobile.shape[1]

    @property
    def f(self) -> int:
        return self.C_fixed.shape[0]

    @property
    def m(self) -> int:
        return self.C_mobile.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.f + self.m

    @classmethod
    def scalar(cls, fixed_variance=None, mobile_variance=1.0):
        """One-state area measured directly; fixed sensor only if a variance is given."""
        if fixed_variance is None:
            return cls(np.zeros((0, 1)), [[1.0]], [], [mobile_variance])
        return cls([[1.0]], [[1.0]], [fixed_variance], [mobile_variance])


@dataclass(frozen=True)
class FieldModel:
    """Discrete LTI field ``x+ = A x + B u + B_d d + w`` with ``w ~ N(0, Q)``.

    ``dt_hours`` is the model step. All areas must share the same number of
    states; mixed sizes are rejected.
    """

    areas: tuple
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    B_disturbance: Optional[np.ndarray] = None
    dt_hours: float = 1.0

    def __post_init__(self):
        areas = tuple(self.areas)
        object.__setattr__(self, "areas", areas)
        if not areas:
            raise ValueError("a field model needs at least one area")
        sizes = {a.n_states for a in areas}
        if len(sizes) != 1:
            raise ValueError(f"areas must share one state size, got {sorted(sizes)}")
        nx = len(areas) * areas[0].n_states
        A = np.asarray(self.A, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape != (nx, nx) or Q.shape != (nx, nx):
            raise ValueError(f"A and Q must be {nx}x{nx}")
        if B.shape[0] != nx:
            raise ValueError(f"B must have {nx} rows")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-10 * max(1.0, np.abs(Q).max()):
            raise ValueError("Q must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Q", Q)
        if self.B_disturbance is not None:
            Bd = np.asarray(self.B_disturbance, dtype=float)
            if Bd.ndim == 1:
                Bd = Bd.reshape(-1, 1)
            if Bd.shape[0] != nx:
                raise ValueError(f"B_disturbance must have {nx} rows")
            object.__setattr__(self, "B_disturbance", Bd)

    @property
    def N(self) -> int:
        return len(self.areas)

    @property
    def n(self) -> int:
        return self.areas[0].n_states

    @property
    def n_states(self) -> int:
        return self.N * self.n

    @property
    def n_outputs(self) -> int:
        return sum(a.n_outputs for a in self.areas)

    def block(self, area: int) -> slice:
        """State slice owned by ``area``."""
        return slice(area * self.n, (area + 1) * self.n)

    @cached_property
    def output_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([a.n_outputs for a in self.areas])])

    @cached_property
    def noise_variances(self) -> np.ndarray:
        """Diagonal of ``R`` in output order (per area: fixed rows, then mobile rows)."""
        return np.concatenate([np.concatenate([a.r_fixed, a.r_mobile]) for a in self.areas])

    @cached_property
    def fixed_info_blocks(self) -> tuple:
        return tuple(a.C_fixed.T @ (a.C_fixed / a.r_fixed[:, None]) for a in self.areas)

    @cached_property
    def mobile_info_blocks(self) -> tuple:
        return tuple(a.C_mobile.T @ (a.C_mobile / a.r_mobile[:, None]) for a in self.areas)

    @cached_property
    def fixed_info(self) -> np.ndarray:
        """Sum of every area's fixed-sensor information term."""
        out = np.zeros((self.n_states, self.n_states))
        for a, blk in enumerate(self.fixed_info_blocks):
            sl = self.block(a)
            out[sl, sl] += blk
        return out

    @cached_property
    def has_fixed(self) -> bool:
        return any(a.f for a in self.areas)


@dataclass(frozen=True)
class SelectionMatrix:
    """Row selector ``Gamma_k`` over the ``M`` outputs of ``C``."""

    rows: np.ndarray
    n_outputs: int

    @property
    def M_k(self) -> int:
        return len(self.rows)

    @property
    def matrix(self) -> np.ndarray:
        G = np.zeros((len(self.rows), self.n_outputs))
        G[np.arange(len(self.rows)), self.rows] = 1.0
        return G


def _check_gamma(model, gamma):
    gamma = np.asarray(gamma)
    if gamma.shape != (model.N,):
        raise ValueError(f"visit vector must have length {model.N}, got shape {gamma.shape}")
    return gamma.astype(bool)


def assemble_observation(model: FieldModel) -> np.ndarray:
    """Block-diagonal observation matrix ``C`` of shape ``(M, N n)``."""
    C = np.zeros((model.n_outputs, model.n_states))
    off = model.output_offsets
    for a, area in enumerate(model.areas):
        C[off[a]:off[a + 1], model.block(a)] = np.vstack([area.C_fixed, area.C_mobile])
    return C


def selection_matrix(model: FieldModel, gamma) -> SelectionMatrix:
    """Outputs available for visit vector ``gamma``.

    Fixed rows are always selected; area ``a``'s mobile rows only when
    ``gamma[a]`` is set.
    """
    gamma = _check_gamma(model, gamma)
    rows = []
    off = model.output_offsets
    for a, area in enumerate(model.areas):
        rows.extend(range(off[a], off[a] + area.f))
        if gamma[a]:
            rows.extend(range(off[a] + area.f, off[a + 1]))
    return SelectionMatrix(np.asarray(rows, dtype=int), model.n_outputs)


def info_term(model: FieldModel, area: int, kind: str = "mobile") -> np.ndarray:
    """Information ``C^T R^{-1} C`` contributed by one area's fixed or mobile rows.

    Returned as a full ``(N n, N n)`` matrix that is zero outside the area's
    diagonal block.
    """
    if not 0 <= area < model.N:
        raise IndexError(f"area {area} out of range for N={model.N}")
    if kind == "mobile":
        blk = model.mobile_info_blocks[area]
    elif kind == "fixed":
        blk = model.fixed_info_blocks[area]
    else:
        raise ValueError(f"kind must be 'fixed' or 'mobile', got {kind!r}")
    out = np.zeros((model.n_states, model.n_states))
    sl = model.block(area)
    out[sl, sl] = blk
    return out


def grid_adjacency(rows: int, cols: int) -> np.ndarray:
    """4-neighbour adjacency of a ``rows x cols`` grid in row-major cell order."""
    N = rows * cols
    adj = np.zeros((N, N))
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                adj[i, i + 1] = adj[i + 1, i] = 1.0
            if r + 1 < rows:
                adj[i, i + cols] = adj[i + cols, i] = 1.0
    return adj


def grid_field(
    rows: int,
    cols: int,
    coupling: float = 0.05,
    process_std: float = 0.1,
    fixed_areas: Sequence[int] = (),
    fixed_variance: float = 0.05,
    mobile_variance=0.1,
    n_inputs: int = 1,
    disturbance_gain: float = 0.0,
    dt_hours: float = 1.0,
) -> FieldModel:
    """Diffusion-coupled scalar field on a grid.

    ``A = I - coupling * L`` with ``L`` the grid Laplacian and
    ``Q = process_std**2 * (I + 0.5 * Adj)`` projected onto the PSD cone, so
    neighbouring areas have correlated process noise. ``mobile_variance`` may
    be a scalar or one value per area.
    """
    N = rows * cols
    adj = grid_adjacency(rows, cols)
    lap = np.diag(adj.sum(axis=1)) - adj
    A = np.eye(N) - coupling * lap
    Q = process_std ** 2 * (np.eye(N) + 0.5 * adj)
    w, V = np.linalg.eigh(Q)
    Q = (V * np.clip(w, 0.0, None)) @ V.T
    Q = 0.5 * (Q + Q.T)
    mobile = np.broadcast_to(np.asarray(mobile_variance, dtype=float), (N,))
    fixed = set(int(a) for a in fixed_areas)
    if any(not 0 <= a < N for a in fixed):
        raise ValueError("fixed sensor area out of range")
    areas = tuple(
        AreaSensing.scalar(fixed_variance if a in fixed else None, float(mobile[a]))
        for a in range(N)
    )
    B = np.zeros((N, n_inputs))
    Bd = np.full((N, 1), disturbance_gain) if disturbance_gain else None
    return FieldModel(areas, A, B, Q, B_disturbance=Bd, dt_hours=dt_hours)
