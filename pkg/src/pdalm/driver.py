"""Outer loop: primal-dual augmented Lagrangian (``pdalm``) and plain ALM (``alm``).

Each outer iteration first tries a Newton step on the reduced KKT system
(``pdalm`` only).  When that step is unavailable or rejected, the
augmented Lagrangian is minimised over the box instead and the multiplier
and penalty parameter are updated as in the classical method.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import numpy as np

from .inner import inner_solve
from .kkt import estimate_active_sets, kkt_residual, nu_rule
from .linalg import project_box
from .model import NlpProblem
from .newton import acceptance_test, compute_trial

logger = logging.getLogger(__name__)

MODES = ("pdalm", "alm")
STATUSES = ("kkt_satisfied", "max_outer", "time_limit", "inner_failure")
# absolute floor on the feasibility threshold; keeps a roundoff-sized
# initial violation from producing an unreachable relative target
FEAS_FLOOR = 100 * np.finfo(float).eps


@dataclass
class SolverConfig:
    mode: str = "pdalm"
    mu_bar_min: float = -1e12
    mu_bar_max: float = 1e12
    beta: float = 0.5
    eta: float = 0.5
    theta: float = 0.1
    delta0: float = 1.0
    epsilon0: Union[float, str] = "auto"
    tau0: float = 1e-1
    tau_shrink: float = 0.1
    tau_floor: float = 1e-14
    eps_opt: float = 1e-6
    eps_feas: float = 1e-6
    max_outer: int = 400
    time_limit_s: float = 3600.0
    strict_feasibility_check: bool = True
    nu: Optional[float] = None  # None: recomputed every iteration by nu_rule
    inner_max_iter: int = 5000

    def __post_init__(self):
        for msg in config_errors(asdict(self)):
            raise ValueError(msg)


def _in_open_unit(v):
    return 0 < v < 1


# field -> (predicate, message); messages are shown verbatim to CLI users
_DOMAINS = {
    "mode": (lambda v: v in MODES, "mode must be one of pdalm, alm"),
    "beta": (_in_open_unit, "beta must lie in (0,1)"),
    "eta": (_in_open_unit, "eta must lie in (0,1)"),
    "theta": (_in_open_unit, "theta must lie in (0,1)"),
    "tau_shrink": (_in_open_unit, "tau_shrink must lie in (0,1)"),
    "delta0": (lambda v: v > 0, "delta0 must be positive"),
    "epsilon0": (lambda v: v == "auto" or (not isinstance(v, str) and v > 0), "epsilon0 must be positive or 'auto'"),
    "tau0": (lambda v: v > 0, "tau0 must be positive"),
    "tau_floor": (lambda v: v >= 0, "tau_floor must be nonnegative"),
    "eps_opt": (lambda v: v > 0, "eps_opt must be positive"),
    "eps_feas": (lambda v: v > 0, "eps_feas must be positive"),
    "max_outer": (lambda v: v >= 0, "max_outer must be nonnegative"),
    "time_limit_s": (lambda v: v > 0, "time_limit_s must be positive"),
    "nu": (lambda v: v is None or v > 0, "nu must be positive"),
    "inner_max_iter": (lambda v: v > 0, "inner_max_iter must be positive"),
    "mu_bar_min": (np.isfinite, "mu_bar_min must be finite"),
    "mu_bar_max": (np.isfinite, "mu_bar_max must be finite"),
}


def config_errors(values: dict) -> list[str]:
    """Domain violations among ``values`` (a possibly partial config dict)."""
    errs = [msg for key, (ok, msg) in _DOMAINS.items() if key in values and not ok(values[key])]
    if "mu_bar_min" in values and "mu_bar_max" in values and not values["mu_bar_min"] < values["mu_bar_max"]:
        errs.append("mu_bar_min must be smaller than mu_bar_max")
    return errs


CONFIG_FIELDS = {f.name: f for f in fields(SolverConfig)}


@dataclass
class Iterate:
    k: int
    x: np.ndarray
    mu: np.ndarray
    mu_bar: np.ndarray
    epsilon: float
    delta: float
    tau: float
    step_kind: str  # kind of step that produced this iterate: newton | subproblem | none


@dataclass
class TraceRecord:
    """State at the start of outer iteration ``k`` and the step taken from it."""

    k: int
    x: np.ndarray
    mu_bar: np.ndarray
    stationarity: float
    feasibility: float
    epsilon: float
    delta: float
    tau: float
    step_kind: str
    inner_iterations: int = 0
    inner_status: str = ""
    inner_pg_residual: float = np.nan
    newton_available: Optional[bool] = None
    acceptance_norm: float = np.nan
    trial_feasibility: float = np.nan
    nu: float = np.nan
    n_lower_active: int = 0
    n_upper_active: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = v.tolist()
            elif isinstance(v, float) and not np.isfinite(v):
                v = None
            out[f.name] = v
        return out


@dataclass
class SolveReport:
    status: str
    final: Iterate
    trace: list[TraceRecord]
    f_final: float
    newton_steps_accepted: int
    h0_inf: float
    wall_time: float
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def outer_iterations(self) -> int:
        return self.final.k

    @property
    def inner_iterations_total(self) -> int:
        return sum(r.inner_iterations for r in self.trace)


def update_multiplier(mu_bar, h_new, epsilon: float) -> np.ndarray:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return np.asarray(mu_bar, dtype=float) + (2.0 / epsilon) * np.asarray(h_new, dtype=float)


def project_multiplier(mu, mu_bar_min: float, mu_bar_max: float) -> np.ndarray:
    if not mu_bar_min < mu_bar_max:
        raise ValueError("mu_bar_min must be smaller than mu_bar_max")
    return np.maximum(mu_bar_min, np.minimum(np.asarray(mu, dtype=float), mu_bar_max))


def update_penalty(epsilon: float, h_new_inf: float, h_old_inf: float, eta: float, theta: float) -> float:
    """Keep ``epsilon`` if the violation dropped by the factor ``eta``, else shrink it."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return epsilon if h_new_inf <= eta * h_old_inf else theta * epsilon


def check_stop(problem: NlpProblem, x, mu_bar, eps_opt: float, eps_feas: float, h0_inf: float) -> bool:
    """Scaled stationarity and relative feasibility test.

    With ``h0_inf == 0`` the feasibility test is absolute. The relative
    threshold never drops below ``FEAS_FLOOR``.
    """
    stat, feas = kkt_residual(problem, x, mu_bar)
    gf = float(np.max(np.abs(problem.grad_f(x)), initial=0.0))
    feas_tol = max(eps_feas * h0_inf, FEAS_FLOOR) if h0_inf > 0 else eps_feas
    return stat <= eps_opt * max(1.0, gf) and feas <= feas_tol


def epsilon0_auto(problem: NlpProblem, x0) -> float:
    h = problem.h(np.asarray(x0, dtype=float))
    f = problem.f(np.asarray(x0, dtype=float))
    raw = max(1.0, 0.5 * float(h @ h)) / (10.0 * max(1.0, abs(f)))
    return float(np.clip(raw, 1e-8, 10.0))


def solve(problem: NlpProblem, config: Optional[SolverConfig] = None, x0=None) -> SolveReport:
    """Run the outer iteration until the stopping test or a limit triggers."""
    cfg = config if config is not None else SolverConfig()
    lo, up = problem.lower, problem.upper
    x = project_box(problem.x0 if x0 is None else np.asarray(x0, dtype=float), lo, up)
    mu = project_multiplier(np.zeros(problem.p), cfg.mu_bar_min, cfg.mu_bar_max)
    mu_bar = mu.copy()
    eps = epsilon0_auto(problem, x) if cfg.epsilon0 == "auto" else float(cfg.epsilon0)
    delta, tau = cfg.delta0, cfg.tau0
    h_inf = float(np.max(np.abs(problem.h(x)), initial=0.0))
    h0_inf = h_inf

    trace: list[TraceRecord] = []
    accepted_total = 0
    last_kind = "none"
    inner_failed = False
    t0 = time.perf_counter()
    k = 0
    while True:
        stat, feas = kkt_residual(problem, x, mu_bar)
        rec = TraceRecord(k=k, x=x.copy(), mu_bar=mu_bar.copy(), stationarity=stat, feasibility=feas,
                          epsilon=eps, delta=delta, tau=tau, step_kind="none")
        trace.append(rec)
        if check_stop(problem, x, mu_bar, cfg.eps_opt, cfg.eps_feas, h0_inf):
            status = "kkt_satisfied"
        elif inner_failed:
            status = "inner_failure"
        elif k >= cfg.max_outer:
            status = "max_outer"
        elif time.perf_counter() - t0 > cfg.time_limit_s:
            status = "time_limit"
        else:
            status = None
        if status is not None:
            rec.wall_time = time.perf_counter() - t0
            break

        trial = None
        accepted = False
        if cfg.mode == "pdalm":
            nu = cfg.nu if cfg.nu is not None else nu_rule(problem, x, mu_bar)
            active = estimate_active_sets(problem, x, mu_bar, nu)
            trial = compute_trial(problem, x, mu_bar, active)
            rec.nu = nu
            rec.n_lower_active = int(active.lower_active.size)
            rec.n_upper_active = int(active.upper_active.size)
            rec.newton_available = trial.available
            if trial.available:
                rec.acceptance_norm = trial.acceptance_norm
                rec.trial_feasibility = trial.trial_feasibility
                accepted = acceptance_test(trial, delta, cfg.eta, h_inf, cfg.strict_feasibility_check)

        if accepted:
            x_new = trial.x_trial
            mu = mu_bar + trial.d_mu
            delta = cfg.beta * delta
            h_new_inf = trial.trial_feasibility
            last_kind = rec.step_kind = "newton"
            accepted_total += 1
        else:
            res = inner_solve(problem, x, mu_bar, eps, tau, cfg.inner_max_iter)
            x_new = res.x
            h_new = problem.h(x_new)
            h_new_inf = float(np.max(np.abs(h_new), initial=0.0))
            mu = update_multiplier(mu_bar, h_new, eps)
            eps = update_penalty(eps, h_new_inf, h_inf, cfg.eta, cfg.theta)
            last_kind = rec.step_kind = "subproblem"
            rec.inner_iterations = res.iterations
            rec.inner_status = res.status
            rec.inner_pg_residual = res.pg_residual_inf
            newton_usable = trial is not None and trial.available
            inner_failed = res.status == "stalled" and not newton_usable
            if res.status != "converged":
                logger.debug("%s: inner solve %s at k=%d (pg=%.3e, tau=%.1e)",
                             problem.name, res.status, k, res.pg_residual_inf, tau)

        mu_bar = project_multiplier(mu, cfg.mu_bar_min, cfg.mu_bar_max)
        tau = max(cfg.tau_floor, cfg.tau_shrink * tau)
        x = x_new
        h_inf = h_new_inf
        rec.wall_time = time.perf_counter() - t0
        k += 1

    final = Iterate(k=k, x=x, mu=mu, mu_bar=mu_bar, epsilon=eps, delta=delta, tau=tau, step_kind=last_kind)
    return SolveReport(
        status=status,
        final=final,
        trace=trace,
        f_final=problem.f(x),
        newton_steps_accepted=accepted_total,
        h0_inf=h0_inf,
        wall_time=time.perf_counter() - t0,
        config=cfg,
    )


def final_active_sets(problem: NlpProblem, report: SolveReport, nu: Optional[float] = None):
    """Active-set estimate at the final primal-dual pair of a run."""
    x, mu_bar = report.final.x, report.final.mu_bar
    return estimate_active_sets(problem, x, mu_bar, nu if nu is not None else nu_rule(problem, x, mu_bar))

