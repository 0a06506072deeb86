import io
import json

import numpy as np
import pytest

from pdalm import corpus
from pdalm.bench import (
    COLUMNS,
    BenchError,
    ConfigError,
    RunSpec,
    csv_text,
    parse_config,
    performance_profile,
    read_csv,
    run_benchmark,
)
from pdalm.cli import main
from pdalm.driver import FEAS_FLOOR, SolverConfig


@pytest.fixture(scope="module")
def full_report():
    return run_benchmark(RunSpec())


def test_full_table_shape_and_order(full_report):
    rows = full_report.rows
    assert len(rows) == 2 * len(corpus.names())
    keys = [(r["problem"], r["mode"]) for r in rows]
    assert keys == sorted(keys)
    assert all(tuple(r) == COLUMNS for r in rows)


def test_profile_monotone_and_reaches_solve_fraction(full_report):
    n = len(corpus.names())
    for mode, fr in full_report.profile.items():
        vals = [fr[a] for a in (1, 2, 5, 10, 100)]
        assert vals == sorted(vals)
        solved = sum(r["status"] == "kkt_satisfied" for r in full_report.rows if r["mode"] == mode)
        assert vals[-1] == pytest.approx(solved / n)


def test_status_consistent_with_residuals(full_report):
    cfg = SolverConfig()
    for r in full_report.rows:
        if r["status"] != "kkt_satisfied":
            continue
        p = corpus.get(r["problem"]).problem
        rep = full_report.reports[(r["problem"], r["mode"])]
        gf = float(np.max(np.abs(p.grad_f(rep.final.x))))
        h0 = float(np.max(np.abs(p.h(p.x0)), initial=0.0))
        assert r["final_stationarity"] <= cfg.eps_opt * max(1.0, gf)
        feas_tol = max(cfg.eps_feas * h0, FEAS_FLOOR) if h0 > 0 else cfg.eps_feas
        assert r["final_feasibility"] <= feas_tol


def test_determinism_except_wall_time(full_report):
    again = run_benchmark(RunSpec(workers=4))
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows]
    assert strip(again.rows) == strip(full_report.rows)


def test_csv_round_trip(full_report):
    text = csv_text(full_report.rows)
    assert text.splitlines()[0] == ",".join(COLUMNS)
    assert read_csv(io.StringIO(text)) == full_report.rows


def test_csv_quotes_special_fields():
    row = {k: 0 for k in COLUMNS}
    row.update(problem='odd,"name"', mode="pdalm", status="max_outer",
               final_stationarity=0.1, final_feasibility=1e-300, f_final=-1 / 3, wall_time_s=2.5)
    text = csv_text([row])
    assert '"odd,""name"""' in text
    assert read_csv(io.StringIO(text)) == [row]


def test_single_run_profile():
    rep = run_benchmark(RunSpec(problem_names=["hs006"], modes=["pdalm"]))
    assert len(rep.rows) == 1
    assert rep.profile["pdalm"] == {a: 1.0 for a in (1, 2, 5, 10, 100)}


def test_pdalm_not_slower_on_eq_quadratic(full_report):
    it = {r["mode"]: r["outer_iters"] for r in full_report.rows if r["problem"] == "eq_quadratic_2d"}
    assert it["pdalm"] <= it["alm"]


def test_performance_profile_counts_unsolved():
    rows = [
        {"problem": "a", "mode": "x", "status": "kkt_satisfied", "wall_time_s": 1.0},
        {"problem": "a", "mode": "y", "status": "kkt_satisfied", "wall_time_s": 3.0},
        {"problem": "b", "mode": "x", "status": "max_outer", "wall_time_s": 1.0},
        {"problem": "b", "mode": "y", "status": "kkt_satisfied", "wall_time_s": 1.0},
    ]
    prof = performance_profile(rows, ["x", "y"])
    assert prof["x"] == {1: 0.5, 2: 0.5, 5: 0.5, 10: 0.5, 100: 0.5}
    assert prof["y"] == {1: 0.5, 2: 0.5, 5: 1.0, 10: 1.0, 100: 1.0}


def test_run_spec_errors(tmp_path):
    with pytest.raises(BenchError, match="nope"):
        RunSpec(problem_names=["nope"])
    with pytest.raises(BenchError):
        RunSpec(modes=["newton"])
    with pytest.raises(BenchError):
        run_benchmark(RunSpec(problem_names=["hs006"], output_path=str(tmp_path / "missing" / "out.csv")))


def test_json_output(tmp_path):
    out = tmp_path / "b.json"
    run_benchmark(RunSpec(problem_names=["hs006", "hs040"], output_path=str(out), output_format="json"))
    data = json.loads(out.read_text())
    assert len(data["runs"]) == 4
    run = data["runs"][0]
    assert len(run["trace"]) == run["outer_iters"] + 1
    assert set(data["performance_profile"]) == {"alm", "pdalm"}


def test_parse_config_examples():
    assert parse_config("beta = 0.25") == {"beta": 0.25}
    with pytest.raises(ConfigError, match=r"beta must lie in \(0,1\)"):
        parse_config("beta = 1.5")
    with pytest.raises(ConfigError, match="unknown_key") as exc:
        parse_config("# comment\nunknown_key = 3")
    assert exc.value.line == 2 and exc.value.column == 1


def test_parse_config_types_and_comments():
    text = """
    # solver knobs
    mode = alm            # baseline
    max_outer = 50
    strict_feasibility_check = false
    epsilon0 = auto
    nu = none
    eps_opt = 1e-8
    """
    cfg = parse_config(text)
    assert cfg == {"mode": "alm", "max_outer": 50, "strict_feasibility_check": False,
                   "epsilon0": "auto", "nu": None, "eps_opt": 1e-8}
    SolverConfig(**cfg)


def test_parse_config_errors_carry_position():
    with pytest.raises(ConfigError) as exc:
        parse_config("beta = 0.5\nmax_outer = ten")
    assert exc.value.line == 2 and exc.value.column == 13
    with pytest.raises(ConfigError) as exc:
        parse_config("beta 0.5")
    assert exc.value.line == 1
    with pytest.raises(ConfigError, match="mu_bar_min"):
        parse_config("mu_bar_min = 5\nmu_bar_max = 1")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["list-problems"]) == 0
    assert main(["validate", "hs078"]) == 0
    assert main(["solve", "eq_quadratic_2d", "--mode", "alm"]) == 0
    assert main(["solve", "nope"]) == 1
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("beta = 1.5\n")
    assert main(["solve", "hs006", "--config", str(cfg)]) == 1
    assert "beta must lie in (0,1)" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_cli_solve_trace_and_bench_csv(tmp_path):
    trace = tmp_path / "t.json"
    assert main(["solve", "circle_corner", "--trace", str(trace)]) == 0
    data = json.loads(trace.read_text())
    assert data["status"] == "kkt_satisfied" and data["trace"][-1]["step_kind"] == "none"
    out = tmp_path / "b.csv"
    assert main(["bench", "--problems", "hs006,hs007", "--modes", "pdalm", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = read_csv(fh)
    assert [r["problem"] for r in rows] == ["hs006", "hs007"]


def test_cli_internal_error_exit_code(monkeypatch):
    import pdalm.cli as cli

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "solve", boom)
    assert main(["solve", "hs006"]) == 2
