"""Monitoring graph over area centroids, flight paths and feasibility.

Vertex ``0`` is the take-off pad, ``N + 1`` the landing pad and vertex
``a + 1`` the centroid of area ``a``. Every area connects to both depots;
areas connect to each other only when they share a grid side. There is no
depot-to-depot edge.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "MonitorGraph",
    "Path",
    "Feasibility",
    "build_grid",
    "make_path",
    "is_feasible",
    "visit_vector",
    "edges_csv",
    "budget_limit",
]

BUDGET_RTOL = 1e-9


def budget_limit(budget: float) -> float:
    """Largest admissible path cost for ``budget``, absorbing float round-off."""
    return budget * (1 + BUDGET_RTOL) + BUDGET_RTOL



@dataclass(frozen=True)
class MonitorGraph:
    """Undirected weighted graph with depots ``0`` and ``N + 1``.

    ``times`` is a dense ``(N+2, N+2)`` symmetric matrix of travel times in
    seconds, ``inf`` where there is no edge.
    """

    N: int
    coords: np.ndarray
    times: np.ndarray
    grid_shape: Optional[tuple] = None
    cell_time: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.shape != (self.N + 2, self.N + 2):
            raise ValueError("travel time matrix must be (N+2) x (N+2)")
        if not np.array_equal(t, t.T):
            raise ValueError("travel times must be symmetric")
        finite = np.isfinite(t)
        if np.any(t[finite] < 0):
            raise ValueError("travel times must be nonnegative")
        if np.any(np.diag(finite)):
            raise ValueError("self-loops are not allowed")
        inner = np.arange(1, self.N + 1)
        if not (finite[0, inner].all() and finite[self.N + 1, inner].all()):
            raise ValueError("every area must connect to both depots")
        if finite[0, self.N + 1]:
            raise ValueError("depots may not be joined directly")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))
        nbrs = tuple(tuple(int(j) for j in np.flatnonzero(finite[i])) for i in range(self.N + 2))
        object.__setattr__(self, "_neighbors", nbrs)

    @property
    def end(self) -> int:
        return self.N + 1

    @property
    def n_vertices(self) -> int:
        return self.N + 2

    def neighbors(self, i: int) -> tuple:
        """Sorted neighbours of vertex ``i``."""
        return self._neighbors[i]

    def interior_neighbors(self, i: int) -> tuple:
        return tuple(j for j in self._neighbors[i] if 1 <= j <= self.N)

    def has_edge(self, i: int, j: int) -> bool:
        return 0 <= i < self.n_vertices and 0 <= j < self.n_vertices and bool(np.isfinite(self.times[i, j]))

    def edges(self) -> list:
        """Undirected edges ``(i, j)`` with ``i < j`` in lexicographic order."""
        n = self.n_vertices
        return [(i, j) for i in range(n) for j in self._neighbors[i] if j > i]

    def t(self, i: int, j: int) -> float:
        return float(self.times[i, j])

    @classmethod
    def from_edges(cls, N, interior_edges, start_times, end_times, coords=None):
        """Build a graph from explicit interior edges ``{(i, j): t}`` (1-based vertices)."""
        t = np.full((N + 2, N + 2), np.inf)
        for (i, j), w in dict(interior_edges).items():
            if not (1 <= i <= N and 1 <= j <= N) or i == j:
                raise ValueError(f"bad interior edge {(i, j)}")
            t[i, j] = t[j, i] = w
        t[0, 1:N + 1] = t[1:N + 1, 0] = np.broadcast_to(start_times, (N,))
        t[N + 1, 1:N + 1] = t[1:N + 1, N + 1] = np.broadcast_to(end_times, (N,))
        if coords is None:
            coords = np.zeros((N + 2, 2))
        return cls(N, coords, t)


@dataclass(frozen=True)
class Path:
    """Ordered vertex sequence of one flight and its travel time."""

    seq: tuple
    cost: float

    @property
    def areas(self) -> tuple:
        """Visited areas (0-based), in visiting order."""
        return tuple(v - 1 for v in self.seq[1:-1])

    def __len__(self):
        return len(self.seq)


def make_path(seq: Iterable[int], g: MonitorGraph) -> Path:
    """Wrap a vertex sequence, summing edge times along it (``inf`` across non-edges)."""
    seq = tuple(int(v) for v in seq)
    cost = 0.0
    for a, b in zip(seq, seq[1:]):
        cost += g.times[a, b] if (0 <= a < g.n_vertices and 0 <= b < g.n_vertices) else np.inf
    return Path(seq, float(cost))


def build_grid(
    rows: int,
    cols: int,
    cell_time: float = 30.0,
    depot_xy: Sequence[float] = (0.0, 0.0),
    cruise_speed_ratio: float = 2.0,
    end_depot_xy: Optional[Sequence[float]] = None,
) -> MonitorGraph:
    """Grid graph of ``rows x cols`` areas in row-major order.

    Coordinates are in cell widths with the centroid of cell ``(r, c)`` at
    ``(c + 0.5, r + 0.5)``. Sensing legs between adjacent cells take
    ``cell_time`` seconds; depot legs fly ``cruise_speed_ratio`` times faster
    than the sensing speed of one cell per ``cell_time``.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and one column")
    if cell_time <= 0 or cruise_speed_ratio <= 0:
        raise ValueError("cell_time and cruise_speed_ratio must be positive")
    N = rows * cols
    coords = np.zeros((N + 2, 2))
    coords[0] = depot_xy
    coords[N + 1] = depot_xy if end_depot_xy is None else end_depot_xy
    for r in range(rows):
        for c in range(cols):
            coords[1 + r * cols + c] = (c + 0.5, r + 0.5)
    t = np.full((N + 2, N + 2), np.inf)
    for r in range(rows):
        for c in range(cols):
            i = 1 + r * cols + c
            if c + 1 < cols:
                t[i, i + 1] = t[i + 1, i] = cell_time
            if r + 1 < rows:
                t[i, i + cols] = t[i + cols, i] = cell_time
    cruise = cruise_speed_ratio / cell_time
    for depot in (0, N + 1):
        d = np.linalg.norm(coords[1:N + 1] - coords[depot], axis=1) / cruise
        t[depot, 1:N + 1] = t[1:N + 1, depot] = d
    return MonitorGraph(N, coords, t, grid_shape=(rows, cols), cell_time=float(cell_time))


class Feasibility:
    """Truthy result of :func:`is_feasible`; ``reason`` names the first violation."""

    __slots__ = ("ok", "reason")

    def __init__(self, ok: bool, reason: str = ""):
        self.ok = ok
        self.reason = reason

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"Feasibility(ok={self.ok}, reason={self.reason!r})"


def is_feasible(path, g: MonitorGraph, budget: float) -> Feasibility:
    """Check a path against the flight constraints.

    Reason codes: ``too-short``, ``bad-start``, ``bad-end``, ``depot-inside``,
    ``not-an-edge``, ``revisit``, ``over-budget``.
    """
    seq = tuple(path.seq if isinstance(path, Path) else path)
    if len(seq) < 3:
        return Feasibility(False, "too-short")
    if seq[0] != 0:
        return Feasibility(False, "bad-start")
    if seq[-1] != g.end:
        return Feasibility(False, "bad-end")
    inner = seq[1:-1]
    if any(not 1 <= v <= g.N for v in inner):
        return Feasibility(False, "depot-inside")
    if any(not g.has_edge(a, b) for a, b in zip(seq, seq[1:])):
        return Feasibility(False, "not-an-edge")
    if len(set(inner)) != len(inner):
        return Feasibility(False, "revisit")
    cost = sum(g.times[a, b] for a, b in zip(seq, seq[1:]))
    if cost > budget_limit(budget):
        return Feasibility(False, "over-budget")
    return Feasibility(True)


def visit_vector(path, N: int) -> np.ndarray:
    """Boolean vector with ``gamma[a]`` set iff vertex ``a + 1`` lies on the path."""
    seq = path.seq if isinstance(path, Path) else path
    gamma = np.zeros(N, dtype=bool)
    for v in seq:
        if 1 <= v <= N:
            gamma[v - 1] = True
    return gamma


def edges_csv(g: MonitorGraph) -> str:
    """Edge list as CSV with columns ``i, j, t_ij``."""
    buf = io.StringIO()
    buf.write("i,j,t_ij\n")
    for i, j in g.edges():
        buf.write(f"{i},{j},{g.t(i, j)!r}\n")
    return buf.getvalue()
