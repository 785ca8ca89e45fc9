"""Sequential edge randomized rounding of the relaxed flight.

From the take-off pad, the next area is drawn by roulette selection with
weights equal to the relaxed edge values. Only unvisited areas whose
landing leg still fits the budget are eligible. When none is left the
landing edge closes the flight. Of ``L`` independent rollouts the one with
the largest ``lambda_min`` is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import InformationObjective, mask_of
from .exceptions import NoFeasiblePath
from .graph import MonitorGraph, Path, budget_limit, make_path, visit_vector
from .model import FieldModel
from .relaxation import RelaxedSolution

__all__ = [
    "STOP",
    "RoundingConfig",
    "roulette_next",
    "rollout",
    "randomized_rounding",
    "degradation",
    "reorder_path",
    "rollout_rng",
]

STOP = None


@dataclass(frozen=True)
class RoundingConfig:
    """``L`` rollouts seeded from ``seed``; ``allow_reorder`` runs :func:`reorder_path` on the winner."""

    L: int = 500
    seed: int = 0
    allow_reorder: bool = False

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be at least 1")


def rollout_rng(seed: int, iteration: int) -> np.random.Generator:
    """Independent generator for one rollout, derived from ``(seed, iteration)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(iteration,)))


def roulette_next(current, out_edges, visited, g: MonitorGraph, remaining, rng):
    """Draw the area after ``current``, or :data:`STOP`.

    Parameters
    ----------
    current : int
        Current vertex (0 at take-off).
    out_edges : sequence of (j, q)
        Relaxed values on edges leaving ``current``.
    visited : set of int
        Areas already on the path.
    remaining : float
        Budget left, already including round-off slack.

    An area ``j`` is admissible when unvisited and
    ``t(current, j) + t(j, N+1) <= remaining``. Admissible areas are drawn
    with probability proportional to their relaxed edge value, or uniformly
    when all of them carry zero mass. The landing edge is not drawn; the
    flight stops only when no area is admissible.
    """
    T = g.times
    end = g.end
    areas, weights = [], []
    for j, q in out_edges:
        if 1 <= j <= g.N and j not in visited and T[current, j] + T[j, end] <= remaining:
            areas.append(j)
            weights.append(max(q, 0.0))
    if not areas:
        return STOP
    total = sum(weights)
    if total > 0:
        r = rng.random() * total
        acc = 0.0
        for j, w in zip(areas, weights):
            acc += w
            if r < acc:
                return j
        # round-off left r past the last positive weight
        return next(j for j, w in zip(reversed(areas), reversed(weights)) if w > 0)
    return areas[int(rng.integers(len(areas)))]


def _out_edges(relaxed, g):
    if isinstance(relaxed, RelaxedSolution):
        table = relaxed.out_edges()
    else:
        table = relaxed
    # vertices the relaxation has no edge for still need their graph edges
    out = {}
    for i in range(g.N + 1):
        have = dict(table.get(i, ()))
        nbrs = [j for j in g.neighbors(i) if j != 0]
        out[i] = [(j, float(have.get(j, 0.0))) for j in nbrs]
    return out


def rollout(relaxed, g: MonitorGraph, budget: float, rng, _out=None) -> Path:
    """One randomized flight from vertex 0, closed with the landing edge."""
    out = _out if _out is not None else _out_edges(relaxed, g)
    limit = budget_limit(budget)
    T = g.times
    seq = [0]
    visited = set()
    cost = 0.0
    cur = 0
    while True:
        j = roulette_next(cur, out[cur], visited, g, limit - cost, rng)
        if j is STOP:
            break
        cost += T[cur, j]
        seq.append(j)
        visited.add(j)
        cur = j
    if cur == 0:
        raise NoFeasiblePath("no single-area flight fits the budget")
    seq.append(g.end)
    return make_path(seq, g)


def randomized_rounding(
    relaxed,
    g: MonitorGraph,
    model: FieldModel,
    P_prior,
    budget: float,
    cfg: RoundingConfig = RoundingConfig(),
    objective: InformationObjective | None = None,
):
    """Best of ``cfg.L`` rollouts by ``lambda_min``; ties keep the earlier rollout.

    Rollout ``k`` draws from :func:`rollout_rng` ``(cfg.seed, k)``, so the
    result is deterministic and a larger ``L`` extends the same stream.

    Returns
    -------
    path : Path
    lam : float
    """
    obj = objective if objective is not None else InformationObjective(model, P_prior)
    out = _out_edges(relaxed, g)
    best_path, best_lam = None, -np.inf
    for it in range(cfg.L):
        path = rollout(relaxed, g, budget, rollout_rng(cfg.seed, it), _out=out)
        lam = obj.of_mask(mask_of(visit_vector(path, g.N)))
        if lam > best_lam:
            best_path, best_lam = path, lam
    if cfg.allow_reorder:
        best_path = reorder_path(best_path, g, budget, model, P_prior, objective=obj)
        best_lam = obj.of_mask(mask_of(visit_vector(best_path, g.N)))
    return best_path, float(best_lam)


def degradation(lambda_h: float, lambda_opt: float) -> float:
    """Percentage loss ``(1 - lambda_h / lambda_opt) * 100``."""
    if not lambda_opt > 0:
        raise ValueError("optimal value must be positive")
    return (1.0 - lambda_h / lambda_opt) * 100.0


def _cheapest_order(areas, g: MonitorGraph):
    """Cheapest ``0 -> all areas -> N+1`` ordering along graph edges (Held-Karp).

    Returns ``(cost, seq)`` or ``None`` when the areas admit no simple path.
    """
    nodes = sorted(areas)
    k = len(nodes)
    T = g.times
    full = (1 << k) - 1
    INF = np.inf
    cost = [[INF] * k for _ in range(1 << k)]
    parent = [[-1] * k for _ in range(1 << k)]
    for a in range(k):
        cost[1 << a][a] = T[0, nodes[a]]
    adj = [[b for b in range(k) if np.isfinite(T[nodes[a], nodes[b]]) and a != b] for a in range(k)]
    for mask in range(1, full + 1):
        row = cost[mask]
        for a in range(k):
            c = row[a]
            if c == INF:
                continue
            for b in adj[a]:
                if mask & (1 << b):
                    continue
                nm = mask | (1 << b)
                nc = c + T[nodes[a], nodes[b]]
                if nc < cost[nm][b]:
                    cost[nm][b] = nc
                    parent[nm][b] = a
    best, last = INF, -1
    for a in range(k):
        c = cost[full][a] + T[nodes[a], g.end]
        if c < best:
            best, last = c, a
    if last < 0:
        return None
    order = []
    mask = full
    while last >= 0:
        order.append(nodes[last])
        prev = parent[mask][last]
        mask &= ~(1 << last)
        last = prev
    seq = (0,) + tuple(reversed(order)) + (g.end,)
    return make_path(seq, g).cost, seq


def reorder_path(
    path: Path,
    g: MonitorGraph,
    budget: float,
    model: FieldModel,
    P_prior,
    max_nodes: int = 12,
    objective: InformationObjective | None = None,
) -> Path:
    """Cheapest ordering of the visited areas, then local search on the visit set.

    Two moves alternate until neither helps. Insertion adds the area adjacent
    to the visit set with the best ``lambda_min`` gain per extra second. Swap
    replaces one visited area with an unvisited one when the cheapest
    ordering of the new set fits the budget and raises ``lambda_min`` most.
    Never returns a path with smaller ``lambda_min`` than the input. Sets
    larger than ``max_nodes`` are left as they are.
    """
    areas = set(path.seq[1:-1])
    if len(areas) > max_nodes:
        return path
    obj = objective if objective is not None else InformationObjective(model, P_prior)
    limit = budget_limit(budget)
    best = _cheapest_order(areas, g)
    current = path if best is None or best[0] >= path.cost else make_path(best[1], g)

    def lam(s):
        return obj.of_mask(mask_of(visit_vector((0,) + tuple(s), g.N)))

    while True:
        while len(areas) < max_nodes:
            base = lam(areas)
            frontier = sorted({j for a in areas for j in g.interior_neighbors(a)} - areas)
            choice = None
            for c in frontier:
                trial = areas | {c}
                res = _cheapest_order(trial, g)
                if res is None or res[0] > limit:
                    continue
                gain = lam(trial) - base
                if gain <= 0:
                    continue
                extra = res[0] - current.cost
                rate = gain / extra if extra > 0 else np.inf
                if choice is None or rate > choice[0]:
                    choice = (rate, c, res[1])
            if choice is None:
                break
            areas.add(choice[1])
            current = make_path(choice[2], g)
        swap = _best_swap(areas, g, limit, lam)
        if swap is None:
            return current
        areas, seq = swap
        current = make_path(seq, g)


def _best_swap(areas, g: MonitorGraph, limit: float, lam):
    """Best single exchange of a visited for an unvisited area, or ``None``."""
    base = lam(areas)
    best = None
    outside = [c for c in range(1, g.N + 1) if c not in areas
               and g.t(0, c) + g.t(c, g.end) <= limit]
    for a in sorted(areas):
        for c in outside:
            trial = (areas - {a}) | {c}
            value = lam(trial)
            if value <= base or (best is not None and value <= best[0]):
                continue
            res = _cheapest_order(trial, g)
            if res is not None and res[0] <= limit:
                best = (value, trial, res[1])
    return None if best is None else (best[1], best[2])
