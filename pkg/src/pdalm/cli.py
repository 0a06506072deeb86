"""Command-line entry point: ``pdalm solve | bench | list-problems | validate``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import corpus
from .bench import BenchError, ConfigError, RunSpec, csv_text, parse_config, run_benchmark, run_json
from .driver import MODES, SolverConfig, final_active_sets, solve
from .kkt import kkt_residual
from .model import validate

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _entry(name):
    try:
        return corpus.get(name)
    except KeyError:
        raise UsageError(f"unknown problem {name!r}; see list-problems") from None


def _cmd_solve(args) -> int:
    entry = _entry(args.problem)
    overrides = _load_config(args.config)
    if args.mode is not None:
        overrides["mode"] = args.mode
    try:
        cfg = SolverConfig(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.trace:
        try:
            out = open(args.trace, "w")
        except OSError as exc:
            raise UsageError(f"cannot write trace to {args.trace}: {exc.strerror}") from None
    report = solve(entry.problem, cfg)
    stat, feas = kkt_residual(entry.problem, report.final.x, report.final.mu_bar)
    act = final_active_sets(entry.problem, report)
    np.set_printoptions(precision=10, suppress=False)
    print(f"problem          {entry.name}")
    print(f"mode             {cfg.mode}")
    print(f"status           {report.status}")
    print(f"outer_iters      {report.outer_iterations}")
    print(f"newton_accepted  {report.newton_steps_accepted}")
    print(f"inner_iters      {report.inner_iterations_total}")
    print(f"f                {report.f_final:.12g}")
    print(f"stationarity     {stat:.3e}")
    print(f"feasibility      {feas:.3e}")
    print(f"lower_active     {act.lower_active.tolist()}")
    print(f"upper_active     {act.upper_active.tolist()}")
    print(f"x                {report.final.x}")
    print(f"mu               {report.final.mu_bar}")
    if args.trace:
        with out:
            json.dump(run_json(entry.name, cfg.mode, report), out, indent=1)
    return EXIT_OK


def _cmd_bench(args) -> int:
    overrides = _load_config(args.config)
    problems = "all" if args.problems == "all" else [p for p in args.problems.split(",") if p]
    modes = [m for m in args.modes.split(",") if m]
    try:
        spec = RunSpec(problem_names=problems, modes=modes, config_overrides=overrides,
                       output_path=args.out, output_format=args.format, workers=args.workers)
        report = run_benchmark(spec)
    except BenchError as exc:
        raise UsageError(str(exc)) from None
    if args.out is None:
        sys.stdout.write(csv_text(report.rows))
    for mode, fractions in report.profile.items():
        cells = "  ".join(f"a={a}:{v:.2f}" for a, v in fractions.items())
        print(f"profile {mode:6s} {cells}", file=sys.stderr)
    return EXIT_OK


def _cmd_list(args) -> int:
    for entry in corpus.corpus():
        p = entry.problem
        tags = ",".join(sorted(entry.tags)) or "-"
        print(f"{entry.name:20s} n={p.n:<4d} p={p.p:<3d} {tags}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    entry = _entry(args.problem)
    rep = validate(entry.problem)
    print(f"{entry.name}: {'ok' if rep.ok else 'issues found'}")
    if rep.grad_rel_errors is not None:
        print(f"max gradient rel. error  {float(np.max(rep.grad_rel_errors, initial=0.0)):.2e}")
    if rep.jac_rel_errors is not None:
        print(f"max jacobian rel. error  {float(np.max(rep.jac_rel_errors, initial=0.0)):.2e}")
    print(f"hessian rel. error       {rep.hess_rel_error:.2e}")
    for issue in rep.issues:
        print(f"  - {issue}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdalm", description="Primal-dual augmented Lagrangian solver and benchmark.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one corpus problem")
    p.add_argument("problem")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--trace", metavar="FILE", help="write the run with its full trace as JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run problems under several modes")
    p.add_argument("--problems", default="all", help="'all' or a comma-separated list")
    p.add_argument("--modes", default=",".join(MODES))
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("list-problems", help="list corpus entries")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("validate", help="check a problem's derivatives against finite differences")
    p.add_argument("problem")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pdalm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"pdalm: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
