"""Convex relaxation of the information-orienteering model.

With ``q`` relaxed to ``[0, 1]`` and ``u`` to reals, the visit weights
``gamma_a = sum of q over edges entering area a`` are linear in ``q`` and
``lambda_min(Y(gamma))`` is concave. The relaxation is maximised by
Frank-Wolfe: each step solves a linear program over the relaxed path polytope
with the supergradient as objective, then moves by an exact line search.

The order constraints alone admit fractional cycles that never connect to
the start depot. Connectivity cuts remove them: for a set ``S`` of areas and
any ``p`` in ``S``, the flow entering ``S`` from outside is at least the flow
entering ``p``. Every flight satisfies these, so the relaxation stays an
upper bound. They are separated by minimum cuts from the start depot.

The budget row alone also lets a small weight ride a long detour that no
single flight could afford. Before solving, every edge whose cheapest
depot-to-depot path already exceeds the budget is fixed to zero.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .estimator import InformationObjective
from .exact import MisdpEncoding, cheapest_single_visit, encode_path, shortest_interior_times
from .graph import MonitorGraph, budget_limit, make_path
from .lp import LinearProgram, make_solver
from .model import FieldModel

__all__ = [
    "RelaxedPolytope", "RelaxedSolution", "build_relaxed_polytope", "separate_connectivity_cuts",
    "solve_relaxation", "unreachable_edges",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FLOW_SCALE = 1e7


@dataclass(frozen=True)
class RelaxedPolytope:
    """Relaxed path constraints as an LP over ``[q (edges), u (areas)]``."""

    encoding: MisdpEncoding
    lp: LinearProgram

    @property
    def edges(self) -> tuple:
        return self.encoding.edges

    @property
    def n_q(self) -> int:
        return len(self.encoding.edges)

    def gamma_matrix(self) -> np.ndarray:
        """``(N, n_vars)`` map from LP variables to visit weights."""
        G = np.zeros((self.encoding.N, self.lp.n_vars))
        G[:, :self.n_q] = self.encoding.gamma_matrix()
        return G

    def point_of_path(self, path) -> np.ndarray:
        q, u = encode_path(path, self.encoding.graph)
        x = np.zeros(self.lp.n_vars)
        for k, e in enumerate(self.edges):
            x[k] = q[e]
        x[self.n_q:] = [u[v] for v in range(1, self.encoding.N + 1)]
        return x


def unreachable_edges(g: MonitorGraph, budget: float, edges) -> np.ndarray:
    """Mask of edges that no flight within ``budget`` can use.

    A flight through ``(i, j)`` costs at least the shortest take-off path to
    ``i``, plus ``t_ij``, plus the shortest landing path from ``j``.
    """
    N, end = g.N, g.end
    D = shortest_interior_times(g)
    take_off = np.zeros(N + 2)
    landing = np.zeros(N + 2)
    take_off[1:N + 1] = np.min(g.times[0, 1:N + 1][:, None] + D, axis=0)
    landing[1:N + 1] = np.min(D + g.times[1:N + 1, end][None, :], axis=1)
    limit = budget_limit(budget)
    return np.array([take_off[i] + g.t(i, j) + landing[j] > limit for i, j in edges])


def build_relaxed_polytope(g: MonitorGraph, budget: float, fix_unreachable: bool = True) -> RelaxedPolytope:
    """Path constraints with ``0 <= q <= 1`` and ``1 <= u <= N``.

    With ``fix_unreachable``, edges no affordable flight can use get ``q = 0``.
    """
    enc = MisdpEncoding(g, budget)
    names = [v[0] for v in enc.variables()]
    col = {name: k for k, name in enumerate(names)}
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for con in enc.constraints():
        row = np.zeros(len(names))
        for v, c in con.coeffs.items():
            row[col[v]] += c
        if con.sense == "=":
            eq_rows.append(row)
            eq_rhs.append(con.rhs)
        else:
            ub_rows.append(row)
            ub_rhs.append(con.rhs)
    n_q = len(enc.edges)
    lo, hi = enc.u_bounds
    lb = np.r_[np.zeros(n_q), np.full(g.N, float(lo))]
    ub = np.r_[np.ones(n_q), np.full(g.N, float(hi))]
    if fix_unreachable:
        ub[:n_q][unreachable_edges(g, budget, enc.edges)] = 0.0
    lp = LinearProgram(np.zeros(len(names)), np.array(ub_rows), np.array(ub_rhs),
                       np.array(eq_rows), np.array(eq_rhs), lb, ub, names=names)
    return RelaxedPolytope(enc, lp)


@dataclass
class RelaxedSolution:
    """Frank-Wolfe output.

    Attributes
    ----------
    edges : tuple
        Directed edges, aligned with ``q_r``.
    q_r : ndarray
        Fractional edge values in ``[0, 1]``.
    u_r : ndarray
        Relaxed visiting orders for areas ``1..N``.
    alpha_r : float
        ``lambda_min`` at ``q_r``.
    fw_gap : float
        Frank-Wolfe gap at the returned iterate.
    upper_bound : float
        Smallest ``lambda + gap`` seen; no point of the (cut) polytope
        exceeds it.
    iterations : int
    """

    edges: tuple
    q_r: np.ndarray
    u_r: np.ndarray
    alpha_r: float
    fw_gap: float
    upper_bound: float
    iterations: int
    history: list

    def q(self, i: int, j: int) -> float:
        try:
            return float(self.q_r[self.edges.index((i, j))])
        except ValueError:
            return 0.0

    def out_edges(self) -> dict:
        """``{i: [(j, q_ij), ...]}`` over every directed edge of the model."""
        out = {}
        for (i, j), val in zip(self.edges, self.q_r):
            out.setdefault(i, []).append((j, float(val)))
        return out

    def gamma(self, N: int) -> np.ndarray:
        g = np.zeros(N)
        for (_, j), val in zip(self.edges, self.q_r):
            if 1 <= j <= N:
                g[j - 1] += val
        return g

    def to_csv(self) -> str:
        """Per-edge values as CSV with columns ``i, j, q_r``."""
        buf = io.StringIO()
        buf.write("i,j,q_r\n")
        for (i, j), val in zip(self.edges, self.q_r):
            buf.write(f"{i},{j},{float(val)!r}\n")
        return buf.getvalue()


def _line_search(lam_at, tol):
    """Maximise a concave function on ``[0, 1]`` by golden-section search."""
    a, b = 0.0, 1.0
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = lam_at(c), lam_at(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = lam_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = lam_at(d)
    tau, best = (c, fc) if fc >= fd else (d, fd)
    f1 = lam_at(1.0)
    if f1 >= best:
        return 1.0, f1
    return tau, best


def separate_connectivity_cuts(poly: RelaxedPolytope, x, tol: float = 1e-3):
    """Connectivity cuts violated by more than ``tol`` at ``x``.

    Returns
    -------
    A, b : ndarray
        Rows in ``A x <= b`` form, one per violated ``(S, p)``. Empty when
        every area's inflow can be routed from the start depot.
    """
    N = poly.encoding.N
    V = N + 2
    edges = poly.edges
    q = np.clip(np.asarray(x, dtype=float)[:poly.n_q], 0.0, 1.0)
    src = np.array([e[0] for e in edges])
    dst = np.array([e[1] for e in edges])
    cap = np.rint(q * FLOW_SCALE).astype(np.int32)
    C = csr_matrix((cap, (src, dst)), shape=(V, V))
    C.eliminate_zeros()
    inflow = np.bincount(dst, weights=q, minlength=V)
    rows, seen = [], set()
    for p in range(1, N + 1):
        if inflow[p] <= tol:
            continue
        res = maximum_flow(C, 0, p)
        if res.flow_value / FLOW_SCALE >= inflow[p] - tol:
            continue
        residual = (C - res.flow).tocsr()
        residual.data[residual.data < 0] = 0
        residual.eliminate_zeros()
        reach = breadth_first_order(residual, 0, directed=True, return_predecessors=False)
        inside = np.ones(V, dtype=bool)
        inside[reach] = False
        inside[0] = inside[N + 1] = False
        key = (p, inside.tobytes())
        if key in seen:
            continue
        seen.add(key)
        row = np.zeros(poly.lp.n_vars)
        row[:poly.n_q] = (dst == p).astype(float) - (inside[dst] & ~inside[src])
        rows.append(row)
    if not rows:
        return np.zeros((0, poly.lp.n_vars)), np.zeros(0)
    return np.array(rows), np.zeros(len(rows))


def solve_relaxation(
    g: MonitorGraph,
    model: FieldModel,
    P_prior,
    budget: float,
    tol: float | None = None,
    max_iters: int = 500,
    line_tol: float = 1e-6,
    smoothing: float = 1e-2,
    lp_backend: str = "highs",
    objective: InformationObjective | None = None,
    cuts: bool = True,
    cut_every: int = 20,
    fix_unreachable: bool = True,
) -> RelaxedSolution:
    """Maximise ``lambda_min(Y(gamma(q)))`` over the relaxed path polytope.

    Frank-Wolfe from the cheapest single-area flight. Each iteration solves
    an LP whose objective is the gradient of the soft-min of the spectrum,
    with temperature ``smoothing * |lambda_0|``. It then moves by a
    golden-section line search on that concave function. ``smoothing=0``
    gives the plain eigenvector supergradient. Iteration stops when the
    direction gap drops to ``tol`` (default ``1e-4 * lambda``) or after
    ``max_iters``. The best iterate by ``lambda_min`` is returned.

    With ``cuts`` enabled, connectivity cuts are separated every
    ``cut_every`` iterations and whenever the iteration settles; it only
    stops once none is violated. The iterate is carried as a convex
    combination of LP vertices, and vertices cut off by new rows are dropped
    (weights renormalised), so progress survives each new cut.

    Raises
    ------
    Infeasible
        The polytope is empty (no flight fits the budget).
    """
    poly = build_relaxed_polytope(g, budget, fix_unreachable)
    solver = make_solver(poly.lp, lp_backend)
    obj = objective if objective is not None else InformationObjective(model, P_prior)
    G = poly.gamma_matrix()
    _, j_star = cheapest_single_visit(g)
    x = poly.point_of_path(make_path((0, j_star, g.end), g))
    log_dim = math.log(model.n_states)

    mu = smoothing * abs(obj.eig(G @ x)[0])
    # x is kept as a convex combination of LP vertices so that, when cuts
    # arrive, the vertices they exclude can be dropped without losing feasibility
    x0 = x
    atoms, weights = [x], [1.0]
    best_lam, best_x = -np.inf, x
    upper = np.inf
    history = []
    since_cut = 0
    settled = False
    it = 0
    for it in range(1, max_iters + 1):
        if cuts and (settled or since_cut >= cut_every):
            since_cut = 0
            A, b = separate_connectivity_cuts(poly, x)
            if len(b):
                solver.add_rows(A, b)
                keep = [k for k, a in enumerate(atoms) if np.all(A @ a <= b + 1e-9)]
                if keep and sum(weights[k] for k in keep) > 0:
                    total = sum(weights[k] for k in keep)
                    atoms = [atoms[k] for k in keep]
                    weights = [weights[k] / total for k in keep]
                else:
                    atoms, weights = [x0], [1.0]
                x = sum(w * a for w, a in zip(weights, atoms))
                best_lam, best_x, upper = -np.inf, x, np.inf
            elif settled:
                break
        settled = False
        since_cut += 1
        f, lam, grad_area = obj.smoothed(G @ x, mu)
        if lam > best_lam:
            best_lam, best_x = lam, x
        grad = G.T @ grad_area
        s = solver.maximize(grad).x
        gap = float(grad @ (s - x))
        upper = min(upper, f + gap + (mu * log_dim if mu > 0 else 0.0))
        history.append((lam, f, gap))
        threshold = tol if tol is not None else 1e-4 * abs(lam)
        if gap <= threshold:
            settled = True
        else:
            Yx = obj.matrix(G @ x)
            Ys = obj.matrix(G @ s)
            tau, f_new = _line_search(lambda t: obj.smoothed_value((1 - t) * Yx + t * Ys, mu), line_tol)
            if f_new <= f or tau == 0.0:
                settled = True
            else:
                x = x + tau * (s - x)
                pairs = [((1 - tau) * w, a) for w, a in zip(weights, atoms) if (1 - tau) * w > 0]
                weights = [w for w, _ in pairs] + [tau]
                atoms = [a for _, a in pairs] + [s]
        if settled and not cuts:
            break
    lam = obj.eig(G @ x)[0]
    if lam >= best_lam:
        best_lam, best_x = lam, x
    lam_b, grad_area = obj.supergradient(G @ best_x)
    grad = G.T @ grad_area
    gap = float(grad @ (solver.maximize(grad).x - best_x))
    upper = min(upper, lam_b + gap)
    n_q = poly.n_q
    return RelaxedSolution(
        edges=poly.edges,
        q_r=np.clip(best_x[:n_q], 0.0, 1.0),
        u_r=best_x[n_q:].copy(),
        alpha_r=float(lam_b),
        fw_gap=gap,
        upper_bound=float(upper),
        iterations=it,
        history=history,
    )
