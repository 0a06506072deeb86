"""Primal-dual augmented Lagrangian method for equality- and bound-constrained NLPs."""
from .bench import BenchReport, ConfigError, RunSpec, parse_config, run_benchmark
from .driver import SolveReport, SolverConfig, TraceRecord, solve
from .inner import auglag_eval, inner_solve
from .kkt import (
    ActiveSetEstimate,
    estimate_active_sets,
    kkt_residual,
    lagrangian,
    multiplier_functions,
    nu_rule,
)
from .linalg import SymIndefFactorization, factor_symmetric_indefinite, project_box
from .linalg import solve as solve_factored
from .model import NlpProblem, ValidationReport, reformulate_inequalities, validate
from .newton import NewtonTrial, acceptance_test, compute_trial

__all__ = [
    "ActiveSetEstimate", "BenchReport", "ConfigError", "NewtonTrial", "NlpProblem", "RunSpec",
    "SolveReport", "SolverConfig", "SymIndefFactorization", "TraceRecord", "ValidationReport",
    "acceptance_test", "auglag_eval", "compute_trial", "estimate_active_sets",
    "factor_symmetric_indefinite", "inner_solve", "kkt_residual", "lagrangian",
    "multiplier_functions", "nu_rule", "parse_config", "project_box", "reformulate_inequalities",
    "run_benchmark", "solve", "solve_factored", "validate",
]
