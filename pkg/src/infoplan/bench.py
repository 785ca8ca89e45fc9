"""Benchmark harness: heuristic quality and wall time against the exact solver.

For each grid size, ``count`` random instances are drawn (see
:func:`~infoplan.problem.random_problem`). The heuristic (relaxation plus
rounding) runs on all of them; the exact solver only where the grid is
within ``exact_max_areas``. Instance ``i`` of size ``(r, c)`` is seeded from
``(seed, r, c, i)``, so results do not depend on worker count or order.
"""

from __future__ import annotations

import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exact import solve_exact
from .exceptions import InstanceTooLarge
from .heuristic import RoundingConfig, degradation, randomized_rounding
from .problem import random_problem
from .relaxation import solve_relaxation

__all__ = [
    "DEFAULT_VISITS", "InstanceResult", "SizeReport", "visits_for", "run_instance", "bench",
    "report_csv", "instances_csv", "worker_count",
]

DEFAULT_VISITS = {(4, 4): 6, (5, 5): 7, (5, 6): 8, (6, 6): 9}


def visits_for(rows: int, cols: int) -> int:
    """Flight length used for a grid size: the table above, else about 3/8 of the areas."""
    return DEFAULT_VISITS.get((rows, cols), max(2, round(0.375 * rows * cols)))


@dataclass(frozen=True)
class InstanceResult:
    rows: int
    cols: int
    index: int
    lambda_heuristic: float
    time_heuristic: float
    lambda_exact: float | None
    time_exact: float | None

    @property
    def delta(self) -> float | None:
        if self.lambda_exact is None:
            return None
        return degradation(self.lambda_heuristic, self.lambda_exact)


@dataclass(frozen=True)
class SizeReport:
    rows: int
    cols: int
    visits: int
    count: int
    mean_delta: float | None
    max_delta: float | None
    mean_time_heuristic: float
    mean_time_exact: float | None


def instance_seed(seed: int, rows: int, cols: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, rows, cols, index])


def run_instance(rows: int, cols: int, index: int, seed: int = 0, n_rollouts: int = 500,
                 max_iters: int = 500, exact_max_areas: int = 30, visits: int | None = None):
    """Solve one random instance with the heuristic and, if allowed, exactly."""
    k = visits if visits is not None else visits_for(rows, cols)
    p = random_problem(rows, cols, k, instance_seed(seed, rows, cols, index))
    t0 = time.perf_counter()
    rel = solve_relaxation(p.graph, p.model, p.P_prior, p.budget, max_iters=max_iters)
    _, lam_h = randomized_rounding(rel, p.graph, p.model, p.P_prior, p.budget,
                                   RoundingConfig(L=n_rollouts, seed=index))
    t_h = time.perf_counter() - t0
    lam_e = t_e = None
    if rows * cols <= exact_max_areas:
        try:
            t0 = time.perf_counter()
            _, lam_e = solve_exact(p.graph, p.model, p.P_prior, p.budget)
            t_e = time.perf_counter() - t0
        except InstanceTooLarge:
            lam_e = t_e = None
    return InstanceResult(rows, cols, index, lam_h, t_h, lam_e, t_e)


def _run(args):
    return run_instance(*args[:4], **args[4])


def worker_count() -> int:
    """Workers allowed by ``INFOPLAN_THREADS`` (default 1)."""
    raw = os.environ.get("INFOPLAN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"INFOPLAN_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def bench(sizes, count: int = 100, seed: int = 0, n_rollouts: int = 500, max_iters: int = 500,
          exact_max_areas: int = 30, workers: int | None = None):
    """Run the harness.

    Returns
    -------
    reports : list of SizeReport
    results : list of InstanceResult
    """
    workers = worker_count() if workers is None else workers
    opts = dict(seed=seed, n_rollouts=n_rollouts, max_iters=max_iters, exact_max_areas=exact_max_areas)
    jobs = [(r, c, i, seed, {k: v for k, v in opts.items() if k != "seed"})
            for r, c in sizes for i in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run, jobs))
    else:
        results = [_run(j) for j in jobs]
    reports = []
    for r, c in sizes:
        rs = [x for x in results if (x.rows, x.cols) == (r, c)]
        deltas = [x.delta for x in rs if x.delta is not None]
        t_e = [x.time_exact for x in rs if x.time_exact is not None]
        reports.append(SizeReport(
            r, c, visits_for(r, c), len(rs),
            float(np.mean(deltas)) if deltas else None,
            float(np.max(deltas)) if deltas else None,
            float(np.mean([x.time_heuristic for x in rs])),
            float(np.mean(t_e)) if t_e else None,
        ))
    return reports, results


def _fmt(v):
    return "" if v is None else f"{v:.6g}"


def report_csv(reports) -> str:
    """One row per grid size; empty cells where the exact solver did not run."""
    buf = io.StringIO()
    buf.write("grid,visits,count,mean_delta_pct,max_delta_pct,heuristic_time_s,exact_time_s\n")
    for rep in reports:
        buf.write(f"{rep.rows}x{rep.cols},{rep.visits},{rep.count},{_fmt(rep.mean_delta)},"
                  f"{_fmt(rep.max_delta)},{_fmt(rep.mean_time_heuristic)},{_fmt(rep.mean_time_exact)}\n")
    return buf.getvalue()


def instances_csv(results) -> str:
    buf = io.StringIO()
    buf.write("grid,index,lambda_heuristic,lambda_exact,delta_pct,heuristic_time_s,exact_time_s\n")
    for x in results:
        buf.write(f"{x.rows}x{x.cols},{x.index},{x.lambda_heuristic!r},{_fmt(x.lambda_exact)},"
                  f"{_fmt(x.delta)},{x.time_heuristic:.6g},{_fmt(x.time_exact)}\n")
    return buf.getvalue()
