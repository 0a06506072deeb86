"""Augmented Lagrangian evaluation and its bound-constrained minimization.

The inner solver is an active-set truncated-Newton method: variables
estimated active are moved onto their bounds, the free ones follow a
truncated conjugate-gradient Newton direction, and a monotone projected
Armijo search globalises the step.  A projected-gradient step is the
fallback whenever the Newton direction fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kkt import active_sets_from_gradient, nu_from_residual, projected_gradient
from .linalg import project_box
from .model import NlpProblem

ARMIJO = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-16
CG_RTOL = 0.1


@dataclass(frozen=True)
class AugLagEval:
    value: float
    grad: np.ndarray
    h: np.ndarray
    jac_h: np.ndarray


@dataclass
class InnerResult:
    x: np.ndarray
    pg_residual_inf: float
    iterations: int
    status: str  # "converged" | "iteration_cap" | "stalled"
    values: list[float] = field(default_factory=list)


def auglag_eval(problem: NlpProblem, x, mu_bar, epsilon: float) -> AugLagEval:
    """``L(x, mu_bar) + ||h(x)||^2 / epsilon`` and its gradient."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(x, dtype=float)
    mu_bar = np.asarray(mu_bar, dtype=float)
    h = problem.h(x)
    J = problem.jac_h(x)
    value = problem.f(x) + float(mu_bar @ h) + float(h @ h) / epsilon
    grad = problem.grad_f(x) + J @ (mu_bar + (2.0 / epsilon) * h)
    return AugLagEval(value=value, grad=grad, h=h, jac_h=J)


def auglag_hessian(problem: NlpProblem, x, ev: AugLagEval, mu_bar, epsilon: float) -> np.ndarray:
    # Hess L(x, mu_bar + 2h/eps) + (2/eps) J J^T
    H = problem.hess_lag(x, mu_bar + (2.0 / epsilon) * ev.h)
    return H + (2.0 / epsilon) * (ev.jac_h @ ev.jac_h.T)


def truncated_cg(H: np.ndarray, b: np.ndarray, rtol: float = CG_RTOL, max_iter: int | None = None) -> np.ndarray:
    """Approximately solve ``H p = b``.

    Stops at relative residual ``rtol`` or on non-positive curvature, in
    which case the iterate so far (or ``b`` itself on the first pass) is
    returned.
    """
    if max_iter is None:
        max_iter = max(10, 2 * b.size)
    p = np.zeros_like(b)
    r = b.copy()
    d = r.copy()
    rr = r @ r
    target = rtol * np.sqrt(rr)
    for it in range(max_iter):
        Hd = H @ d
        curv = d @ Hd
        if curv <= 0:
            return b.copy() if it == 0 else p
        a = rr / curv
        p += a * d
        r -= a * Hd
        rr_new = r @ r
        if np.sqrt(rr_new) <= target:
            break
        d = r + (rr_new / rr) * d
        rr = rr_new
    return p


class _Search:
    """Projected backtracking search for one inner iteration."""

    def __init__(self, problem, mu_bar, epsilon, x, ev, pg):
        self.problem = problem
        self.mu_bar = mu_bar
        self.epsilon = epsilon
        self.x = x
        self.ev = ev
        self.pg = pg

    def run(self, direction: np.ndarray):
        problem, x, ev = self.problem, self.x, self.ev
        alpha = 1.0
        first = True
        while alpha >= MIN_STEP:
            x_new = project_box(x + alpha * direction, problem.lower, problem.upper)
            s = x_new - x
            if not np.any(s):
                return None
            slope = float(ev.grad @ s)
            ev_new = auglag_eval(problem, x_new, self.mu_bar, self.epsilon)
            if ev_new.value <= ev.value + ARMIJO * min(slope, 0.0) and slope < 0:
                return x_new, ev_new
            if first and ev_new.value <= ev.value:
                # roundoff regime: decrease is invisible in the value but the
                # projected gradient still shrinks
                pg_new = np.max(np.abs(projected_gradient(x_new, ev_new.grad, problem.lower, problem.upper)))
                if pg_new < self.pg:
                    return x_new, ev_new
            first = False
            alpha *= BACKTRACK
        return None


def _newton_direction(problem, x, ev, mu_bar, epsilon, pg_vec) -> np.ndarray | None:
    lo, up = problem.lower, problem.upper
    nu = nu_from_residual(float(np.linalg.norm(pg_vec)))
    act = active_sets_from_gradient(x, ev.grad, lo, up, nu)
    d = np.zeros_like(x)
    d[act.lower_active] = lo[act.lower_active] - x[act.lower_active]
    d[act.upper_active] = up[act.upper_active] - x[act.upper_active]
    F, A = act.free, act.bound
    if F.size:
        H = auglag_hessian(problem, x, ev, mu_bar, epsilon)
        b = -(ev.grad[F] + H[np.ix_(F, A)] @ d[A])
        d[F] = truncated_cg(H[np.ix_(F, F)], b)
    if not ev.grad @ d < 0:
        return None
    return d


def inner_solve(
    problem: NlpProblem,
    x_start,
    mu_bar,
    epsilon: float,
    tau: float,
    max_iter: int = 5000,
) -> InnerResult:
    """Approximately minimise the augmented Lagrangian over the box.

    Converged means ``||x - P(x - grad L_a(x))||_inf <= tau``. Values of
    ``L_a`` along the iterates never increase.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    lo, up = problem.lower, problem.upper
    mu_bar = np.asarray(mu_bar, dtype=float)
    x = project_box(x_start, lo, up)
    ev = auglag_eval(problem, x, mu_bar, epsilon)
    values = [ev.value]
    it = 0
    while True:
        pg_vec = projected_gradient(x, ev.grad, lo, up)
        pg = float(np.max(np.abs(pg_vec), initial=0.0))
        if pg <= tau:
            status = "converged"
            break
        if it >= max_iter:
            status = "iteration_cap"
            break
        search = _Search(problem, mu_bar, epsilon, x, ev, pg)
        step = None
        d = _newton_direction(problem, x, ev, mu_bar, epsilon, pg_vec)
        if d is not None:
            step = search.run(d)
        if step is None:
            step = search.run(-ev.grad)
        if step is None:
            status = "stalled"
            break
        x, ev = step
        values.append(ev.value)
        it += 1
    return InnerResult(x=x, pg_residual_inf=pg, iterations=it, status=status, values=values)
