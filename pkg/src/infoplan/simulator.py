"""Multi-flight closed-loop simulation of field monitoring.

A hidden truth evolves hourly under the field model. Fixed sensors report
every hour. At scheduled hours the mobile sensor flies the path chosen by a
strategy from the current prior covariance. Every strategy in a scenario
sees the same flight hours, process noise, rain and measurement noise, so
their traces are paired sample by sample.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .baseline import build_partitions
from .estimator import BeliefState, correct, predict
from .graph import MonitorGraph, Path, build_grid, visit_vector
from .model import FieldModel, assemble_observation, grid_field, selection_matrix
from .planners import make_planner
from .problem import PlanningProblem

__all__ = [
    "STRATEGIES",
    "ScenarioConfig",
    "FlightEvent",
    "SimTrace",
    "RatioSeries",
    "flight_schedule",
    "rain_series",
    "run_scenario",
    "simulate",
    "ratio_metric",
    "long_format_csv",
]

STRATEGIES = ("exact", "heuristic", "baseline")
RATIO_FLOOR = 1e-15


@dataclass(frozen=True)
class ScenarioConfig:
    """Grid, field model, budget and schedule of one simulated campaign.

    Times are in hours except ``cell_time_s`` and ``budget_s``. When
    ``budget_s`` is ``None`` it is taken from the partition baseline: the
    cost of sweeping the largest block of ``block`` cells.
    """

    rows: int
    cols: int
    budget_s: float | None = None
    block: tuple | None = None
    cell_time_s: float = 30.0
    depot_xy: tuple = (0.0, 0.0)
    cruise_speed_ratio: float = 2.0
    coupling: float = 0.05
    process_std: float = 0.1
    fixed_areas: tuple = ()
    fixed_variance: float = 0.05
    mobile_variance: float | tuple = 0.1
    disturbance_gain: float = 0.0
    rain_probability: float = 0.05
    rain_mean_mm: float = 5.0
    rain_duration_h: float = 3.0
    initial_variance: float = 10.0
    horizon_h: int = 350
    gap_min_h: int = 35
    gap_max_h: int = 70
    seed: int = 0
    measurement_seed: int | None = None
    strategies: tuple = ("heuristic", "baseline")
    budget_scale: dict = field(default_factory=dict)
    n_rollouts: int = 500
    reorder: bool = False
    max_iters: int = 500

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs at least one row and one column")
        if not 1 <= self.gap_min_h <= self.gap_max_h:
            raise ValueError("flight gaps need 1 <= gap_min_h <= gap_max_h")
        if self.horizon_h <= self.gap_max_h:
            raise ValueError("horizon must exceed the longest flight gap")
        if self.budget_s is None and self.block is None:
            raise ValueError("give budget_s or a partition block")
        if self.budget_s is not None and not self.budget_s > 0:
            raise ValueError("budget must be positive")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")
        for s, f in self.budget_scale.items():
            if s not in STRATEGIES or not f > 0:
                raise ValueError(f"bad budget scale {s!r}: {f!r}")

    def graph(self) -> MonitorGraph:
        return build_grid(self.rows, self.cols, cell_time=self.cell_time_s,
                          depot_xy=self.depot_xy, cruise_speed_ratio=self.cruise_speed_ratio)

    def model(self) -> FieldModel:
        return grid_field(self.rows, self.cols, coupling=self.coupling, process_std=self.process_std,
                          fixed_areas=self.fixed_areas, fixed_variance=self.fixed_variance,
                          mobile_variance=self.mobile_variance,
                          disturbance_gain=self.disturbance_gain)

    def base_budget(self, g: MonitorGraph | None = None) -> float:
        if self.budget_s is not None:
            return float(self.budget_s)
        from .baseline import partition_budget

        return partition_budget(g if g is not None else self.graph(), tuple(self.block))

    def budget_for(self, strategy: str, g: MonitorGraph | None = None) -> float:
        return self.base_budget(g) * float(self.budget_scale.get(strategy, 1.0))

    def _streams(self):
        ss = np.random.SeedSequence(self.seed)
        schedule, truth, rain, meas = ss.spawn(4)
        if self.measurement_seed is not None:
            meas = np.random.SeedSequence(self.measurement_seed)
        return schedule, truth, rain, meas


@dataclass(frozen=True)
class FlightEvent:
    time_h: int
    strategy: str
    path: Path
    lambda_plan: float
    budget_s: float


@dataclass
class SimTrace:
    """Hourly posterior metrics of one strategy.

    ``time_h[k] = k + 1``; ``lambda_min`` is the smallest eigenvalue of the
    posterior information matrix and ``trace_P`` the posterior covariance
    trace after the update of that hour.
    """

    strategy: str
    time_h: np.ndarray
    lambda_min: np.ndarray
    trace_P: np.ndarray
    flight: np.ndarray
    flights: list
    final_belief: BeliefState
    truth: np.ndarray

    @property
    def flight_times(self) -> np.ndarray:
        return self.time_h[self.flight]

    def to_csv(self) -> str:
        """Columns ``time_h, lambda_min, trace_P, flight, strategy``."""
        buf = io.StringIO()
        buf.write("time_h,lambda_min,trace_P,flight,strategy\n")
        for t, lam, tr, f in zip(self.time_h, self.lambda_min, self.trace_P, self.flight):
            buf.write(f"{int(t)},{float(lam)!r},{float(tr)!r},{int(f)},{self.strategy}\n")
        return buf.getvalue()

    def flights_csv(self) -> str:
        """One row per flight; ``sequence`` lists graph vertices separated by spaces."""
        buf = io.StringIO()
        buf.write("time_h,strategy,lambda_plan,cost_s,budget_s,sequence\n")
        for ev in self.flights:
            seq = " ".join(str(v) for v in ev.path.seq)
            buf.write(f"{ev.time_h},{ev.strategy},{ev.lambda_plan!r},{ev.path.cost!r},{ev.budget_s!r},{seq}\n")
        return buf.getvalue()


@dataclass
class RatioSeries:
    """``ratio = lambda_num / lambda_den`` per hour; ``nan`` where ``flagged``."""

    numerator: str
    denominator: str
    time_h: np.ndarray
    lambda_num: np.ndarray
    lambda_den: np.ndarray
    ratio: np.ndarray
    flagged: np.ndarray
    flight: np.ndarray

    def at_flights(self) -> np.ndarray:
        return self.ratio[self.flight & ~self.flagged]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"time_h,lambda_{self.numerator},lambda_{self.denominator},ratio,flagged,flight\n")
        for row in zip(self.time_h, self.lambda_num, self.lambda_den, self.ratio, self.flagged, self.flight):
            t, a, b, r, fl, f = row
            buf.write(f"{int(t)},{float(a)!r},{float(b)!r},{float(r)!r},{int(fl)},{int(f)}\n")
        return buf.getvalue()


def flight_schedule(cfg: ScenarioConfig) -> list:
    """Flight hours: cumulative integer gaps drawn uniformly from ``[gap_min_h, gap_max_h]``."""
    rng = np.random.default_rng(cfg._streams()[0])
    times, t = [], 0
    while True:
        t += int(rng.integers(cfg.gap_min_h, cfg.gap_max_h + 1))
        if t > cfg.horizon_h:
            return times
        times.append(t)


def rain_series(cfg: ScenarioConfig) -> np.ndarray:
    """Nonnegative pulse train: storms start at random hours and last a few hours.

    Entry ``k`` is the rainfall (mm) during hour ``k + 1``.
    """
    rng = np.random.default_rng(cfg._streams()[2])
    d = np.zeros(cfg.horizon_h)
    k = 0
    while k < cfg.horizon_h:
        if rng.random() < cfg.rain_probability:
            length = int(rng.geometric(1.0 / max(cfg.rain_duration_h, 1.0)))
            amount = rng.exponential(cfg.rain_mean_mm)
            d[k:k + length] = amount / length
            k += length
        else:
            k += 1
    return d


def _lambda_min_of_covariance(P) -> float:
    return 1.0 / float(np.linalg.eigvalsh(P)[-1])


def run_scenario(cfg: ScenarioConfig, strategy: str) -> SimTrace:
    """Simulate ``cfg.horizon_h`` hours under one strategy.

    Every hour: propagate truth and filter, then correct with the fixed
    sensors plus, at flight hours, the mobile measurements along the planned
    path. Planning sees only the prior covariance of that hour.

    Raises
    ------
    NoFeasiblePath
        When the strategy's budget admits no flight.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    g = cfg.graph()
    model = cfg.model()
    budget = cfg.budget_for(strategy, g)
    if strategy == "baseline":
        build_partitions(g, budget)  # fail early on an unusable budget
    flights = set(flight_schedule(cfg))
    _, truth_ss, _, meas_ss = cfg._streams()
    truth_rng = np.random.default_rng(truth_ss)
    meas_rng = np.random.default_rng(meas_ss)
    rain = rain_series(cfg)
    n = model.n_states
    P0 = cfg.initial_variance * np.eye(n)
    x = truth_rng.multivariate_normal(np.zeros(n), P0)
    belief = BeliefState(np.zeros(n), P0, "posterior")
    C = assemble_observation(model)
    noise_std = np.sqrt(model.noise_variances)
    Bd = model.B_disturbance
    planner = None
    H = cfg.horizon_h
    lam_series, tr_series = np.zeros(H), np.zeros(H)
    flight_mask = np.zeros(H, dtype=bool)
    events, truth = [], np.zeros((H, n))
    no_visit = np.zeros(model.N, dtype=bool)
    for k in range(H):
        t = k + 1
        d = rain[k:k + 1] if Bd is not None else None
        w = truth_rng.multivariate_normal(np.zeros(n), model.Q, method="eigh")
        x = model.A @ x + w + (Bd @ d if Bd is not None else 0.0)
        nu = meas_rng.standard_normal(C.shape[0]) * noise_std
        belief = predict(belief, model, d=d)
        gamma = no_visit
        if t in flights:
            if planner is None:
                planner = make_planner(strategy, n_rollouts=cfg.n_rollouts, reorder=cfg.reorder,
                                       max_iters=cfg.max_iters)
            if strategy == "heuristic":
                planner.set_params(seed=int(np.random.SeedSequence([cfg.seed, t]).generate_state(1)[0]))
            planner.fit(PlanningProblem(g, model, belief.P, budget))
            gamma = visit_vector(planner.path_, model.N)
            events.append(FlightEvent(t, strategy, planner.path_, float(planner.lambda_), budget))
            flight_mask[k] = True
        sel = selection_matrix(model, gamma).matrix
        y = sel @ (C @ x + nu)
        belief = correct(belief, model, gamma, y)
        lam_series[k] = _lambda_min_of_covariance(belief.P)
        tr_series[k] = float(np.trace(belief.P))
        truth[k] = x
    return SimTrace(strategy, np.arange(1, H + 1), lam_series, tr_series, flight_mask,
                    events, belief, truth)


def simulate(cfg: ScenarioConfig) -> dict:
    """``{strategy: SimTrace}`` for every strategy in ``cfg``."""
    return {s: run_scenario(cfg, s) for s in cfg.strategies}


def ratio_metric(trace_num: SimTrace, trace_den: SimTrace) -> RatioSeries:
    """``R(t) = lambda_num(t) / lambda_den(t)``.

    Samples with a denominator below ``1e-15`` are flagged and set to
    ``nan`` instead of dividing.
    """
    if not (np.array_equal(trace_num.time_h, trace_den.time_h)
            and np.array_equal(trace_num.flight, trace_den.flight)):
        raise ValueError("traces are not paired: time axes or flight hours differ")
    den = trace_den.lambda_min
    flagged = ~(np.abs(den) >= RATIO_FLOOR)
    ratio = np.full(den.shape, np.nan)
    ok = ~flagged
    ratio[ok] = trace_num.lambda_min[ok] / den[ok]
    return RatioSeries(trace_num.strategy, trace_den.strategy, trace_num.time_h.copy(),
                       trace_num.lambda_min.copy(), den.copy(), ratio, flagged,
                       trace_num.flight.copy())


def long_format_csv(traces: dict) -> str:
    """``time_h, strategy, metric, value`` rows for external plotting."""
    buf = io.StringIO()
    buf.write("time_h,strategy,metric,value\n")
    for name, tr in traces.items():
        for t, lam, trP in zip(tr.time_h, tr.lambda_min, tr.trace_P):
            buf.write(f"{int(t)},{name},lambda_min,{float(lam)!r}\n")
            buf.write(f"{int(t)},{name},trace_P,{float(trP)!r}\n")
    return buf.getvalue()
