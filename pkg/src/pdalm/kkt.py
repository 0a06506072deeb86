"""Lagrangian quantities, bound-multiplier estimates and active-set estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import project_box
from .model import NlpProblem

NU_CAP = 1e-6


@dataclass(frozen=True)
class LagrangianEval:
    value: float
    grad_x: np.ndarray
    h: np.ndarray
    jac_h: np.ndarray


@dataclass(frozen=True)
class MultiplierEstimates:
    sigma: np.ndarray
    rho: np.ndarray


@dataclass(frozen=True)
class ActiveSetEstimate:
    lower_active: np.ndarray
    upper_active: np.ndarray
    free: np.ndarray
    nu: float

    @property
    def bound(self) -> np.ndarray:
        return np.sort(np.concatenate([self.lower_active, self.upper_active]))


def _check_dims(problem: NlpProblem, x, mu):
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if x.shape != (problem.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.n},)")
    if mu.shape != (problem.p,):
        raise ValueError(f"mu has shape {mu.shape}, expected ({problem.p},)")
    return x, mu


def lagrangian(problem: NlpProblem, x, mu) -> LagrangianEval:
    """``L(x, mu) = f(x) + mu^T h(x)`` and its gradient in ``x``."""
    x, mu = _check_dims(problem, x, mu)
    h = problem.h(x)
    J = problem.jac_h(x)
    return LagrangianEval(
        value=problem.f(x) + float(mu @ h),
        grad_x=problem.grad_f(x) + J @ mu,
        h=h,
        jac_h=J,
    )


def bound_multipliers(x, grad, lower, upper) -> MultiplierEstimates:
    """Closed-form bound multiplier estimates for a given Lagrangian gradient.

    The weights are the squared distances to the opposite bound, so sigma
    vanishes at the upper bound and rho at the lower bound.
    """
    dl = (lower - x) ** 2
    du = (upper - x) ** 2
    denom = dl + du
    return MultiplierEstimates(sigma=du / denom * grad, rho=-dl / denom * grad)


def multiplier_functions(problem: NlpProblem, x, mu) -> MultiplierEstimates:
    x, mu = _check_dims(problem, x, mu)
    return bound_multipliers(x, lagrangian(problem, x, mu).grad_x, problem.lower, problem.upper)


def active_sets_from_gradient(x, grad, lower, upper, nu: float) -> ActiveSetEstimate:
    """Active-set estimate given the Lagrangian gradient at ``x``.

    Sign tests are strict with no tolerance.
    """
    est = bound_multipliers(x, grad, lower, upper)
    in_lower = (grad > 0) & (lower <= x) & (x <= lower + nu * est.sigma)
    in_upper = (grad < 0) & (upper - nu * est.rho <= x) & (x <= upper)
    return ActiveSetEstimate(
        lower_active=np.flatnonzero(in_lower),
        upper_active=np.flatnonzero(in_upper),
        free=np.flatnonzero(~(in_lower | in_upper)),
        nu=float(nu),
    )


def estimate_active_sets(problem: NlpProblem, x, mu, nu: float) -> ActiveSetEstimate:
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    x, mu = _check_dims(problem, x, mu)
    grad = lagrangian(problem, x, mu).grad_x
    return active_sets_from_gradient(x, grad, problem.lower, problem.upper, nu)


def projected_gradient(x, grad, lower, upper) -> np.ndarray:
    """``x - P(x - grad)``; zero exactly at box-stationary points."""
    return x - project_box(x - grad, lower, upper)


def nu_from_residual(res_norm: float) -> float:
    if res_norm == 0.0:
        return NU_CAP
    with np.errstate(over="ignore", divide="ignore"):
        return float(min(NU_CAP, res_norm ** -3.0))


def nu_rule(problem: NlpProblem, x, mu) -> float:
    """``min(1e-6, ||x - P(x - grad L)||^-3)`` with the Euclidean norm."""
    x, mu = _check_dims(problem, x, mu)
    pg = projected_gradient(x, lagrangian(problem, x, mu).grad_x, problem.lower, problem.upper)
    return nu_from_residual(float(np.linalg.norm(pg)))


def kkt_residual(problem: NlpProblem, x, mu) -> tuple[float, float]:
    """Sup-norm projected-gradient residual and sup-norm constraint violation."""
    x, mu = _check_dims(problem, x, mu)
    ev = lagrangian(problem, x, mu)
    stat = float(np.max(np.abs(projected_gradient(x, ev.grad_x, problem.lower, problem.upper)), initial=0.0))
    feas = float(np.max(np.abs(ev.h), initial=0.0))
    return stat, feas
