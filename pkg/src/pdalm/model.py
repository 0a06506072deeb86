"""Problem abstraction for equality- and bound-constrained NLPs.

Every problem has the form

    min f(x)   s.t.   h(x) = 0,   lower <= x <= upper

with finite bounds and exact first and second derivatives.  Inequality
constraints g(x) <= 0 are brought into this form by appending slack
variables (see :func:`reformulate_inequalities`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray

FD_RTOL = 1e-5
HESS_FD_RTOL = 1e-4


@dataclass(frozen=True)
class NlpProblem:
    """An evaluable NLP with dense derivatives.

    ``eval_jac_h`` returns an ``(n, p)`` array whose columns are the
    constraint gradients. ``eval_hess_lag(x, mu)`` returns the Hessian of
    ``f(x) + mu @ h(x)`` with respect to ``x``.
    """

    n: int
    p: int
    lower: Vector
    upper: Vector
    eval_f: Callable[[Vector], float]
    eval_grad_f: Callable[[Vector], Vector]
    eval_h: Callable[[Vector], Vector]
    eval_jac_h: Callable[[Vector], Matrix]
    eval_hess_lag: Callable[[Vector, Vector], Matrix]
    x0: Vector
    known_solution: Optional[tuple[Vector, Vector]] = None
    name: str = ""

    def __post_init__(self):
        # normalise array fields once so callers can pass lists
        for attr in ("lower", "upper", "x0"):
            arr = np.asarray(getattr(self, attr), dtype=float).reshape(-1)
            if arr.shape != (self.n,):
                raise ValueError(f"{attr} must have length n={self.n}, got {arr.shape}")
            object.__setattr__(self, attr, arr)
        if self.known_solution is not None:
            xs, ms = self.known_solution
            xs = np.asarray(xs, dtype=float).reshape(self.n)
            ms = np.asarray(ms, dtype=float).reshape(self.p)
            object.__setattr__(self, "known_solution", (xs, ms))

    # thin wrappers that fix output shapes; the raw callables stay public
    def f(self, x: Vector) -> float:
        return float(self.eval_f(x))

    def grad_f(self, x: Vector) -> Vector:
        return np.asarray(self.eval_grad_f(x), dtype=float).reshape(self.n)

    def h(self, x: Vector) -> Vector:
        if self.p == 0:
            return np.zeros(0)
        return np.asarray(self.eval_h(x), dtype=float).reshape(self.p)

    def jac_h(self, x: Vector) -> Matrix:
        if self.p == 0:
            return np.zeros((self.n, 0))
        return np.asarray(self.eval_jac_h(x), dtype=float).reshape(self.n, self.p)

    def hess_lag(self, x: Vector, mu: Vector) -> Matrix:
        H = np.asarray(self.eval_hess_lag(x, np.asarray(mu, dtype=float)), dtype=float)
        return H.reshape(self.n, self.n)


@dataclass
class ValidationReport:
    """Findings of :func:`validate`. An empty ``issues`` list means clean."""

    issues: list[str] = field(default_factory=list)
    unordered_bounds: list[int] = field(default_factory=list)
    x0_outside: list[int] = field(default_factory=list)
    grad_rel_errors: Optional[Vector] = None
    jac_rel_errors: Optional[Matrix] = None
    hess_rel_error: float = 0.0
    bad_grad_components: list[int] = field(default_factory=list)
    bad_jac_entries: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def _fd_step(x: Vector) -> Vector:
    return np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(x))


def fd_gradient(fun: Callable[[Vector], float], x: Vector) -> Vector:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    steps = _fd_step(x)
    g = np.empty_like(x)
    for i, hi in enumerate(steps):
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        g[i] = (fun(xp) - fun(xm)) / (2 * hi)
    return g


def fd_jacobian(fun: Callable[[Vector], Vector], x: Vector, m: int) -> Matrix:
    """Central finite differences of a vector function, returned as (n, m)."""
    x = np.asarray(x, dtype=float)
    steps = _fd_step(x)
    J = np.empty((x.size, m))
    for i, hi in enumerate(steps):
        xp, xm = x.copy(), x.copy()
        xp[i] += hi
        xm[i] -= hi
        J[i] = (np.asarray(fun(xp), dtype=float) - np.asarray(fun(xm), dtype=float)) / (2 * hi)
    return J


def validate(problem: NlpProblem, x: Optional[Vector] = None) -> ValidationReport:
    """Check bounds, the starting point and derivatives of ``problem``.

    Derivatives are compared with central differences at ``x`` (default
    ``problem.x0``). Nothing is raised; all findings go into the report.
    """
    report = ValidationReport()
    lo, up = problem.lower, problem.upper

    report.unordered_bounds = [int(i) for i in np.flatnonzero(~(lo < up))]
    if report.unordered_bounds:
        report.issues.append(f"bounds not strictly ordered at indices {report.unordered_bounds}")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
        report.issues.append("bounds must be finite")
    report.x0_outside = [int(i) for i in np.flatnonzero((problem.x0 < lo) | (problem.x0 > up))]
    if report.x0_outside:
        report.issues.append(f"x0 outside bounds at indices {report.x0_outside}")

    x = problem.x0 if x is None else np.asarray(x, dtype=float)

    g = problem.grad_f(x)
    g_fd = fd_gradient(problem.f, x)
    rel = np.abs(g - g_fd) / np.maximum(1.0, np.abs(g_fd))
    report.grad_rel_errors = rel
    report.bad_grad_components = [int(i) for i in np.flatnonzero(rel > FD_RTOL)]
    if report.bad_grad_components:
        worst = max(report.bad_grad_components, key=lambda i: rel[i])
        report.issues.append(
            f"gradient mismatch at components {report.bad_grad_components} "
            f"(worst relative error {rel[worst]:.3g} at {worst})"
        )

    if problem.p:
        J = problem.jac_h(x)
        J_fd = fd_jacobian(problem.h, x, problem.p)
        relJ = np.abs(J - J_fd) / np.maximum(1.0, np.abs(J_fd))
        report.jac_rel_errors = relJ
        report.bad_jac_entries = [(int(i), int(t)) for i, t in zip(*np.nonzero(relJ > FD_RTOL))]
        if report.bad_jac_entries:
            report.issues.append(f"constraint Jacobian mismatch at (var, constraint) {report.bad_jac_entries}")

    mu = np.ones(problem.p)
    H = problem.hess_lag(x, mu)
    if not np.array_equal(H, H.T):
        report.issues.append("Hessian of the Lagrangian is not exactly symmetric")

    def grad_lag(z):
        return problem.grad_f(z) + problem.jac_h(z) @ mu

    H_fd = fd_jacobian(grad_lag, x, problem.n)
    report.hess_rel_error = float(np.max(np.abs(H - H_fd), initial=0.0) / max(1.0, np.max(np.abs(H_fd), initial=0.0)))
    if report.hess_rel_error > HESS_FD_RTOL:
        report.issues.append(f"Hessian of the Lagrangian mismatch (relative error {report.hess_rel_error:.3g})")
    return report


def reformulate_inequalities(
    base: NlpProblem,
    g: Callable[[Vector], Vector],
    jac_g: Callable[[Vector], Matrix],
    hess_g: Callable[[Vector, Vector], Matrix],
    q: int,
    slack_upper: float = 1e8,
    known_solution: Optional[tuple[Vector, Vector]] = None,
    name: Optional[str] = None,
) -> NlpProblem:
    """Turn ``g(x) <= 0`` into ``g(x) + s = 0`` with ``0 <= s <= slack_upper``.

    ``jac_g`` returns ``(n, q)``; ``hess_g(x, lam)`` returns
    ``sum_t lam_t * Hess g_t(x)``. Equality constraints of ``base`` come
    first in the new constraint vector, the inequality rows follow.
    Slacks start at zero, their lower bound.
    """
    if not slack_upper > 0:
        raise ValueError(f"slack_upper must be positive, got {slack_upper}")
    if q == 0:
        return base

    n, p = base.n, base.p

    def split(z):
        z = np.asarray(z, dtype=float)
        return z[:n], z[n:]

    def f(z):
        return base.f(split(z)[0])

    def grad_f(z):
        return np.concatenate([base.grad_f(split(z)[0]), np.zeros(q)])

    def h(z):
        x, s = split(z)
        return np.concatenate([base.h(x), np.asarray(g(x), dtype=float).reshape(q) + s])

    def jac_h(z):
        x, _ = split(z)
        J = np.zeros((n + q, p + q))
        J[:n, :p] = base.jac_h(x)
        J[:n, p:] = np.asarray(jac_g(x), dtype=float).reshape(n, q)
        J[n:, p:] = np.eye(q)
        return J

    def hess_lag(z, mu):
        x, _ = split(z)
        mu = np.asarray(mu, dtype=float)
        H = np.zeros((n + q, n + q))
        H[:n, :n] = base.hess_lag(x, mu[:p]) + np.asarray(hess_g(x, mu[p:]), dtype=float)
        return H

    return NlpProblem(
        n=n + q,
        p=p + q,
        lower=np.concatenate([base.lower, np.zeros(q)]),
        upper=np.concatenate([base.upper, np.full(q, float(slack_upper))]),
        eval_f=f,
        eval_grad_f=grad_f,
        eval_h=h,
        eval_jac_h=jac_h,
        eval_hess_lag=hess_lag,
        x0=np.concatenate([base.x0, np.zeros(q)]),
        known_solution=known_solution,
        name=name if name is not None else base.name,
    )
