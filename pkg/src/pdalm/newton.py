"""Newton step on the reduced KKT system of the estimated free variables."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kkt import ActiveSetEstimate, estimate_active_sets, lagrangian, nu_rule
from .linalg import ResidualTooLarge, factor_symmetric_indefinite, project_box, solve
from .model import NlpProblem


@dataclass(frozen=True)
class NewtonTrial:
    available: bool
    active: ActiveSetEstimate
    d_x_free: Optional[np.ndarray] = None
    d_mu: Optional[np.ndarray] = None
    x_trial: Optional[np.ndarray] = None
    acceptance_norm: float = np.nan
    trial_feasibility: float = np.nan
    solve_residual: float = np.nan

    @property
    def step(self) -> np.ndarray:
        """The direction ``(d_x_free, d_mu)`` stacked."""
        return np.concatenate([self.d_x_free, self.d_mu])


def assemble_reduced_kkt(problem: NlpProblem, x, mu_bar, active: ActiveSetEstimate):
    """Matrix ``[[H_NN, J_N], [J_N^T, 0]]`` and right-hand side ``-(g_N, h)``."""
    x = np.asarray(x, dtype=float)
    mu_bar = np.asarray(mu_bar, dtype=float)
    ev = lagrangian(problem, x, mu_bar)
    N = active.free
    nf, p = N.size, problem.p
    H = problem.hess_lag(x, mu_bar)
    J = ev.jac_h[N, :]

    K = np.zeros((nf + p, nf + p))
    K[:nf, :nf] = H[np.ix_(N, N)]
    K[:nf, nf:] = J
    K[nf:, :nf] = J.T
    # symmetrise explicitly so the assembled matrix is exactly symmetric
    K = 0.5 * (K + K.T)
    rhs = -np.concatenate([ev.grad_x[N], ev.h])
    return K, rhs


def compute_trial(
    problem: NlpProblem,
    x,
    mu_bar,
    active: Optional[ActiveSetEstimate] = None,
    drop_tol: Optional[float] = None,
) -> NewtonTrial:
    """Newton trial point: free block moved and projected, active block pinned.

    If the reduced system is singular (or its solution fails the residual
    check) the trial is returned with ``available=False``.
    """
    x = np.asarray(x, dtype=float)
    mu_bar = np.asarray(mu_bar, dtype=float)
    if active is None:
        active = estimate_active_sets(problem, x, mu_bar, nu_rule(problem, x, mu_bar))
    K, rhs = assemble_reduced_kkt(problem, x, mu_bar, active)
    fact = factor_symmetric_indefinite(K, drop_tol=drop_tol)
    if fact.singular:
        return NewtonTrial(available=False, active=active)
    try:
        d = solve(fact, rhs)
    except ResidualTooLarge:
        return NewtonTrial(available=False, active=active)

    N = active.free
    d_x, d_mu = d[:N.size], d[N.size:]
    x_trial = x.copy()
    x_trial[N] = project_box(x[N] + d_x, problem.lower[N], problem.upper[N])
    x_trial[active.lower_active] = problem.lower[active.lower_active]
    x_trial[active.upper_active] = problem.upper[active.upper_active]

    B = active.bound
    acc = float(np.linalg.norm(np.concatenate([d_x, d_mu, x_trial[B] - x[B]])))
    h_trial = problem.h(x_trial)
    return NewtonTrial(
        available=True,
        active=active,
        d_x_free=d_x,
        d_mu=d_mu,
        x_trial=x_trial,
        acceptance_norm=acc,
        trial_feasibility=float(np.max(np.abs(h_trial), initial=0.0)),
        solve_residual=float(np.max(np.abs(K @ d - rhs), initial=0.0)),
    )


def acceptance_test(
    trial: NewtonTrial,
    delta: float,
    eta: float,
    h_current_inf: float,
    strict_feasibility_check: bool = True,
) -> bool:
    """Radius test, optionally conjoined with a feasibility-decrease test."""
    if not trial.available:
        raise ValueError("acceptance_test needs an available Newton trial")
    if trial.acceptance_norm > delta:
        return False
    if strict_feasibility_check:
        return trial.trial_feasibility <= eta * h_current_inf
    return True
