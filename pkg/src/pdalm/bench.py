"""Benchmark runner, result tables and the config-file parser."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import corpus
from .driver import CONFIG_FIELDS, MODES, SolveReport, SolverConfig, config_errors, solve
from .kkt import kkt_residual

COLUMNS = (
    "problem", "mode", "status", "outer_iters", "newton_accepted", "inner_iters_total",
    "final_stationarity", "final_feasibility", "f_final", "wall_time_s",
)
_INT_COLUMNS = {"outer_iters", "newton_accepted", "inner_iters_total"}
_FLOAT_COLUMNS = {"final_stationarity", "final_feasibility", "f_final", "wall_time_s"}
PROFILE_ALPHAS = (1, 2, 5, 10, 100)


class BenchError(Exception):
    """Invalid run specification or unusable output location."""


class ConfigError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RunSpec:
    problem_names: Union[str, Sequence[str]] = "all"
    modes: Sequence[str] = MODES
    config_overrides: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    output_format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        known = corpus.names()
        if self.problem_names == "all":
            self.problem_names = list(known)
        else:
            self.problem_names = list(self.problem_names)
            unknown = [p for p in self.problem_names if p not in known]
            if unknown:
                raise BenchError(f"unknown problem(s): {', '.join(unknown)}")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise BenchError(f"unknown mode(s): {', '.join(bad)}")
        if self.output_format not in ("csv", "json"):
            raise BenchError(f"output format must be csv or json, got {self.output_format!r}")
        errs = config_errors(self.config_overrides)
        unknown_keys = set(self.config_overrides) - set(CONFIG_FIELDS) - {"mode"}
        if unknown_keys or errs:
            raise BenchError("; ".join(sorted(unknown_keys) + errs))


@dataclass
class BenchReport:
    rows: list[dict]
    reports: dict  # (problem, mode) -> SolveReport
    profile: dict  # mode -> {alpha: fraction}


def _row(name: str, mode: str, problem, report: SolveReport) -> dict:
    stat, feas = kkt_residual(problem, report.final.x, report.final.mu_bar)
    return {
        "problem": name,
        "mode": mode,
        "status": report.status,
        "outer_iters": report.outer_iterations,
        "newton_accepted": report.newton_steps_accepted,
        "inner_iters_total": report.inner_iterations_total,
        "final_stationarity": stat,
        "final_feasibility": feas,
        "f_final": report.f_final,
        "wall_time_s": report.wall_time,
    }


def performance_profile(rows: list[dict], modes: Sequence[str], alphas=PROFILE_ALPHAS) -> dict:
    """Fraction of problems each mode solves within ``alpha`` times the best wall time."""
    problems = sorted({r["problem"] for r in rows})
    times = {(r["problem"], r["mode"]): r["wall_time_s"] for r in rows if r["status"] == "kkt_satisfied"}
    out = {}
    for mode in modes:
        ratios = []
        for p in problems:
            solved = [times[(p, m)] for m in modes if (p, m) in times]
            if (p, mode) in times:
                best = max(min(solved), np.finfo(float).tiny)
                ratios.append(times[(p, mode)] / best)
        n = max(len(problems), 1)
        out[mode] = {a: sum(r <= a for r in ratios) / n for a in alphas}
    return out


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise BenchError(f"cannot write output to {path}")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise BenchError(f"cannot write output to {path}")


def run_benchmark(spec: RunSpec) -> BenchReport:
    if spec.output_path:
        _check_writable(spec.output_path)
    jobs = [(name, mode) for name in sorted(spec.problem_names) for mode in sorted(spec.modes)]
    overrides = {k: v for k, v in spec.config_overrides.items() if k != "mode"}

    def run(job):
        name, mode = job
        return solve(corpus.get(name).problem, SolverConfig(**{**overrides, "mode": mode}))

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    reports = dict(zip(jobs, results))
    rows = [_row(name, mode, corpus.get(name).problem, reports[(name, mode)]) for name, mode in jobs]
    report = BenchReport(rows=rows, reports=reports, profile=performance_profile(rows, sorted(spec.modes)))
    if spec.output_path:
        with open(spec.output_path, "w", newline="") as fh:
            if spec.output_format == "csv":
                write_csv(rows, fh)
            else:
                json.dump(bench_json(report), fh, indent=1)
    return report


def _fmt(key, value):
    if key in _FLOAT_COLUMNS:
        return format(float(value), ".17g")
    return str(value)


def write_csv(rows: list[dict], fh) -> None:
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(k, row[k]) for k in COLUMNS])


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh) -> list[dict]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    rows = []
    for raw in reader:
        row = {}
        for k in COLUMNS:
            v = raw[k]
            row[k] = int(v) if k in _INT_COLUMNS else float(v) if k in _FLOAT_COLUMNS else v
        rows.append(row)
    return rows


def run_json(name: str, mode: str, report: SolveReport, row: Optional[dict] = None) -> dict:
    out = dict(row) if row is not None else {"problem": name, "mode": mode, "status": report.status}
    out["config"] = asdict(report.config)
    out["final_x"] = report.final.x.tolist()
    out["final_mu_bar"] = report.final.mu_bar.tolist()
    out["trace"] = [rec.to_dict() for rec in report.trace]
    return out


def bench_json(report: BenchReport) -> dict:
    runs = [run_json(r["problem"], r["mode"], report.reports[(r["problem"], r["mode"])], r) for r in report.rows]
    profile = {m: {str(a): v for a, v in fr.items()} for m, fr in report.profile.items()}
    return {"runs": runs, "performance_profile": profile}


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(key: str, text: str):
    ftype = CONFIG_FIELDS[key].type
    if key == "mode":
        return text
    if key == "epsilon0" and text == "auto":
        return "auto"
    if key == "nu" and text.lower() == "none":
        return None
    if ftype == "bool":
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"{key} expects a boolean, got {text!r}")
    if ftype == "int":
        return int(text)
    return float(text)


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines into SolverConfig overrides.

    ``#`` starts a comment. Unknown keys and out-of-domain values raise
    :class:`ConfigError` carrying the offending line and column.
    """
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        value = value_part.strip()
        value_col = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if key not in CONFIG_FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno, key_col)
        if not value:
            raise ConfigError(f"missing value for {key}", lineno, value_col)
        try:
            converted = _convert(key, value)
        except ValueError:
            raise ConfigError(f"invalid value {value!r} for {key}", lineno, value_col) from None
        errs = config_errors({key: converted})
        if errs:
            raise ConfigError(errs[0], lineno, value_col)
        overrides[key] = converted
    errs = config_errors(overrides)
    if errs:
        raise ConfigError(errs[0], len(text.splitlines()) or 1)
    return overrides
