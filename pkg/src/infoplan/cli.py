"""Command-line interface: ``infoplan {plan,simulate,bench,export-misdp}``.

Exit codes: 0 success, 1 other package errors, 2 bad arguments or scenario,
3 no feasible flight, 4 instance too large for the exact solver.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .bench import bench, instances_csv, report_csv
from .exact import MisdpEncoding, export_misdp
from .exceptions import InfoplanError, InstanceTooLarge, NoFeasiblePath, ScenarioError
from .planners import make_planner
from .problem import PlanningProblem, advance_covariance
from .scenario import load_scenario
from .simulator import STRATEGIES, flight_schedule, long_format_csv, ratio_metric, simulate

__all__ = ["main", "build_parser", "first_flight_problem"]

EXIT_ERROR, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_TOO_LARGE = 1, 2, 3, 4


def first_flight_problem(cfg, strategy: str, budget_scale: float = 1.0) -> PlanningProblem:
    """Planning problem at the scenario's first flight hour.

    The prior comes from ``initial_variance * I`` propagated with hourly
    fixed-sensor updates until that hour.
    """
    g = cfg.graph()
    model = cfg.model()
    times = flight_schedule(cfg)
    hours = times[0] if times else cfg.gap_min_h
    P = advance_covariance(cfg.initial_variance * np.eye(model.n_states), model, hours)
    return PlanningProblem(g, model, P, cfg.budget_for(strategy, g) * budget_scale)


def _with_overrides(cfg, args):
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        changes["n_rollouts"] = args.iterations
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _path_csv(path, g) -> str:
    rows = ["step,vertex,area,row,col,cumulative_s"]
    cols = g.grid_shape[1] if g.grid_shape else None
    t = 0.0
    for k, v in enumerate(path.seq):
        if k:
            t += g.t(path.seq[k - 1], v)
        if 1 <= v <= g.N:
            a = v - 1
            r, c = (divmod(a, cols) if cols else ("", ""))
            rows.append(f"{k},{v},{a},{r},{c},{t!r}")
        else:
            rows.append(f"{k},{v},,,,{t!r}")
    return "\n".join(rows) + "\n"


def cmd_plan(args) -> int:
    cfg = _with_overrides(load_scenario(args.scenario), args)
    strategy = "baseline" if args.method == "baseline" else ("exact" if args.method == "exact" else "heuristic")
    problem = first_flight_problem(cfg, strategy, args.budget_scale)
    planner = make_planner(args.method, seed=cfg.seed, n_rollouts=cfg.n_rollouts,
                           reorder=cfg.reorder, max_iters=cfg.max_iters)
    planner.fit(problem)
    print(f"method: {args.method}")
    print(f"budget_s: {problem.budget:.6f}")
    print(f"lambda_min: {planner.lambda_:.12g}")
    out = _out_dir(args) if args.out else None
    if args.method == "relax":
        rel = planner.relaxed_
        print(f"fw_gap: {rel.fw_gap:.6g}")
        print(f"iterations: {rel.iterations}")
        if out:
            (out / "relaxed_q.csv").write_text(rel.to_csv())
        return 0
    path = planner.path_
    print(f"cost_s: {path.cost:.6f}")
    print("sequence: " + " ".join(str(v) for v in path.seq))
    if out:
        (out / f"plan_{args.method}.csv").write_text(_path_csv(path, problem.graph))
    return 0


def cmd_simulate(args) -> int:
    cfg = _with_overrides(load_scenario(args.scenario), args)
    if args.strategies:
        cfg = dataclasses.replace(cfg, strategies=tuple(args.strategies.split(",")))
    if args.budget_scale != 1.0:
        scale = dict(cfg.budget_scale)
        for s in ("heuristic", "exact"):
            scale[s] = scale.get(s, 1.0) * args.budget_scale
        cfg = dataclasses.replace(cfg, budget_scale=scale)
    traces = simulate(cfg)
    out = _out_dir(args)
    for name, tr in traces.items():
        (out / f"trace_{name}.csv").write_text(tr.to_csv())
        (out / f"flights_{name}.csv").write_text(tr.flights_csv())
    names = list(traces)
    if len(names) >= 2:
        num = "heuristic" if "heuristic" in traces else names[0]
        den = "baseline" if "baseline" in traces and num != "baseline" else next(n for n in names if n != num)
        ratio = ratio_metric(traces[num], traces[den])
        (out / "ratio.csv").write_text(ratio.to_csv())
        at = ratio.at_flights()
        if at.size:
            print(f"mean R at flights ({num}/{den}): {np.mean(at):.6g}")
    if args.plot_data:
        (out / "plot_data.csv").write_text(long_format_csv(traces))
    for name, tr in traces.items():
        print(f"{name}: {len(tr.flights)} flights, final lambda_min {tr.lambda_min[-1]:.6g}")
    return 0


def _parse_sizes(text: str):
    sizes = []
    for part in text.split(","):
        try:
            r, c = part.strip().lower().split("x")
            sizes.append((int(r), int(c)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid sizes look like 4x4,5x5; got {part!r}") from None
    return sizes


def cmd_bench(args) -> int:
    reports, results = bench(args.sizes, count=args.count, seed=args.seed if args.seed is not None else 0,
                             n_rollouts=args.iterations or 500, exact_max_areas=args.exact_max_areas)
    text = report_csv(reports)
    sys.stdout.write(text)
    if args.out:
        out = _out_dir(args)
        (out / "bench.csv").write_text(text)
        (out / "bench_instances.csv").write_text(instances_csv(results))
    return 0


def cmd_export(args) -> int:
    cfg = _with_overrides(load_scenario(args.scenario), args)
    problem = first_flight_problem(cfg, "exact", args.budget_scale)
    text = export_misdp(MisdpEncoding(problem.graph, problem.budget), problem.model, problem.P_prior)
    if args.out:
        out = _out_dir(args)
        (out / "model.misdp").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infoplan", description="Information-driven flight planning.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--iterations", type=int, default=None, help="rounding rollouts L")
        p.add_argument("--budget-scale", type=float, default=1.0, help="multiply the planned budget")

    p = sub.add_parser("plan", help="plan the first flight of a scenario")
    common(p)
    p.add_argument("--method", choices=["exact", "relax", "heuristic", "baseline"], default="heuristic")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run the multi-flight simulation")
    common(p)
    p.add_argument("--strategies", default=None,
                   help=f"comma-separated subset of {','.join(STRATEGIES)}")
    p.add_argument("--plot-data", action="store_true", help="also write long-format plot_data.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="heuristic against exact on random instances")
    common(p, scenario=False)
    p.add_argument("--sizes", type=_parse_sizes, default=_parse_sizes("4x4,5x5,5x6,6x6"))
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--exact-max-areas", type=int, default=30)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-misdp", help="write the first-flight model in MISDP text form")
    common(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.out is None:
        args.out = "."
    try:
        if args.budget_scale <= 0:
            raise ScenarioError("--budget-scale must be positive")
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoFeasiblePath as exc:
        print(f"no feasible flight: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InstanceTooLarge as exc:
        print(f"instance too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (InfoplanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
