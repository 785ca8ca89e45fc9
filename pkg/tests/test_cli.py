import pytest

from infoplan.cli import EXIT_INFEASIBLE, EXIT_TOO_LARGE, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def field(text, name):
    for line in text.splitlines():
        if line.startswith(name + ":"):
            return line.split(":", 1)[1].strip()
    raise KeyError(name)


def test_toy_exact_plan(capsys):
    code, out, _ = run(capsys, "plan", "--scenario", "toy_1x2", "--method", "exact")
    assert code == 0
    assert field(out, "sequence") == "0 1 3"


def test_plan_is_deterministic_and_bounded(capsys, tmp_path):
    _, first, _ = run(capsys, "plan", "--scenario", "grid_3x3", "--out", str(tmp_path / "a"))
    _, second, _ = run(capsys, "plan", "--scenario", "grid_3x3", "--out", str(tmp_path / "b"))
    assert first == second
    a = (tmp_path / "a" / "plan_heuristic.csv").read_bytes()
    assert a == (tmp_path / "b" / "plan_heuristic.csv").read_bytes()
    assert a.startswith(b"step,vertex,area,row,col,cumulative_s\n")
    _, exact, _ = run(capsys, "plan", "--scenario", "grid_3x3", "--method", "exact")
    _, relax, _ = run(capsys, "plan", "--scenario", "grid_3x3", "--method", "relax")
    lam_h, lam_e = float(field(first, "lambda_min")), float(field(exact, "lambda_min"))
    assert lam_h <= lam_e <= float(field(relax, "lambda_min")) * (1 + 1e-6)


def test_simulate_writes_outputs(capsys, tmp_path):
    args = ["simulate", "--scenario", "grid_3x3", "--strategies", "heuristic,baseline", "--iterations", "50"]
    code, out, _ = run(capsys, *args, "--out", str(tmp_path / "a"), "--plot-data")
    assert code == 0 and "mean R at flights (heuristic/baseline)" in out
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["flights_baseline.csv", "flights_heuristic.csv", "plot_data.csv", "ratio.csv",
                     "trace_baseline.csv", "trace_heuristic.csv"]
    run(capsys, *args, "--out", str(tmp_path / "b"))
    for name in ("trace_heuristic.csv", "ratio.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # the ratio column is the quotient of the two traces
    rows = [line.split(",") for line in (tmp_path / "a" / "ratio.csv").read_text().splitlines()[1:]]
    for _, num, den, ratio, flagged, _ in rows:
        if flagged == "0":
            assert float(ratio) == pytest.approx(float(num) / float(den), rel=1e-12)


def test_bench_small(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--sizes", "3x3", "--count", "2", "--iterations", "20",
                       "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0].startswith("grid,")
    assert (tmp_path / "bench.csv").read_text() == out
    assert len((tmp_path / "bench_instances.csv").read_text().splitlines()) == 3


def test_bad_sizes_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bench", "--sizes", "4by4"])
    assert info.value.code == EXIT_USAGE


def test_scenario_errors(capsys, tmp_path):
    code, _, err = run(capsys, "plan", "--scenario", "no_such_scenario")
    assert code == EXIT_USAGE and err.startswith("error:")
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid]\nrows = 3\ncols = 3\ncolour = 1\n[budget]\nbudget_s = 100\n")
    code, _, err = run(capsys, "plan", "--scenario", str(bad))
    assert code == EXIT_USAGE and "colour" in err
    code, _, _ = run(capsys, "plan", "--scenario", "grid_3x3", "--budget-scale", "0")
    assert code == EXIT_USAGE


def test_infeasible_budget(capsys, tmp_path):
    f = tmp_path / "short.toml"
    f.write_text("[grid]\nrows = 3\ncols = 3\n[budget]\nbudget_s = 1\n")
    code, _, err = run(capsys, "plan", "--scenario", str(f), "--method", "exact")
    assert code == EXIT_INFEASIBLE and "no feasible flight" in err


def test_exact_too_large(capsys, tmp_path):
    f = tmp_path / "big.toml"
    f.write_text("[grid]\nrows = 7\ncols = 7\n[budget]\nbudget_s = 300\n")
    code, _, err = run(capsys, "plan", "--scenario", str(f), "--method", "exact")
    assert code == EXIT_TOO_LARGE and "too large" in err


def test_export_misdp(capsys, tmp_path):
    code, out, _ = run(capsys, "export-misdp", "--scenario", "toy_1x2")
    assert code == 0 and "q_0_1" in out
    run(capsys, "export-misdp", "--scenario", "toy_1x2", "--out", str(tmp_path))
    assert (tmp_path / "model.misdp").read_text() == out
