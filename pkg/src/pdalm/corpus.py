"""Analytic test problems with exact derivatives.

Several entries are Hock-Schittkowski problems given finite boxes; the
rest are small constructions exercising particular features (active
bounds at the solution, degenerate complementarity, inequality
reformulation, larger dimensions).  Where a closed-form KKT pair is known
it is attached as ``known_solution``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import NlpProblem, reformulate_inequalities

LICQ = "licq"
SC = "strict_complementarity"
SSOSC = "ssosc"
DEGENERATE = "degenerate"
REGULAR = frozenset({LICQ, SC, SSOSC})


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    problem: NlpProblem
    tags: frozenset = field(default_factory=frozenset)
    # equality-constrained convex quadratic whose start is strictly interior
    convex_eq_qp: bool = False
    from_inequalities: bool = False


def _box(n, lo, up):
    return np.full(n, float(lo)), np.full(n, float(up))


def _multipliers_at(x, grad_f, jac_h):
    """Least-squares multipliers for a known primal solution."""
    mu, *_ = np.linalg.lstsq(jac_h(x), -grad_f(x), rcond=None)
    return mu


def _quadratic_eq(name, Q, c, A, b, lower, upper, x0):
    """min 1/2 x'Qx + c'x  s.t.  A x = b (rows of A are constraints)."""
    Q, c, A, b = (np.asarray(v, dtype=float) for v in (Q, c, A, b))
    n, p = Q.shape[0], A.shape[0]
    K = np.block([[Q, A.T], [A, np.zeros((p, p))]])
    sol = np.linalg.solve(K, np.concatenate([-c, b]))
    return NlpProblem(
        n=n, p=p, lower=lower, upper=upper,
        eval_f=lambda x: 0.5 * x @ Q @ x + c @ x,
        eval_grad_f=lambda x: Q @ x + c,
        eval_h=lambda x: A @ x - b,
        eval_jac_h=lambda x: A.T.copy(),
        eval_hess_lag=lambda x, mu: Q.copy(),
        x0=x0, known_solution=(sol[:n], sol[n:]), name=name,
    )


def eq_quadratic_2d() -> CorpusEntry:
    prob = NlpProblem(
        n=2, p=1, lower=[-10, -10], upper=[10, 10],
        eval_f=lambda x: 0.5 * x @ x,
        eval_grad_f=lambda x: x.copy(),
        eval_h=lambda x: np.array([x[0] + x[1] - 1.0]),
        eval_jac_h=lambda x: np.array([[1.0], [1.0]]),
        eval_hess_lag=lambda x, mu: np.eye(2),
        x0=[0.0, 0.0], known_solution=([0.5, 0.5], [-0.5]), name="eq_quadratic_2d",
    )
    return CorpusEntry("eq_quadratic_2d", prob, REGULAR, convex_eq_qp=True)


def circle_corner() -> CorpusEntry:
    # minimisers (sqrt2, 0) and (0, sqrt2); the start breaks the symmetry
    r2 = np.sqrt(2.0)
    prob = NlpProblem(
        n=2, p=1, lower=[0, 0], upper=[2, 2],
        eval_f=lambda x: x[0] + x[1],
        eval_grad_f=lambda x: np.ones(2),
        eval_h=lambda x: np.array([x @ x - 2.0]),
        eval_jac_h=lambda x: 2.0 * x.reshape(2, 1),
        eval_hess_lag=lambda x, mu: 2.0 * mu[0] * np.eye(2),
        x0=[1.5, 0.5], known_solution=([r2, 0.0], [-1.0 / (2.0 * r2)]), name="circle_corner",
    )
    return CorpusEntry("circle_corner", prob, REGULAR)


def degenerate_corner() -> CorpusEntry:
    # x1 sits on its lower bound with a zero bound multiplier
    prob = NlpProblem(
        n=2, p=1, lower=[0, 0], upper=[5, 5],
        eval_f=lambda x: x[0] ** 2 + (x[1] - 1.0) ** 2,
        eval_grad_f=lambda x: np.array([2 * x[0], 2 * (x[1] - 1.0)]),
        eval_h=lambda x: np.array([x[0] - x[1] + 1.0]),
        eval_jac_h=lambda x: np.array([[1.0], [-1.0]]),
        eval_hess_lag=lambda x, mu: 2.0 * np.eye(2),
        x0=[2.0, 1.0], known_solution=([0.0, 1.0], [0.0]), name="degenerate_corner",
    )
    return CorpusEntry("degenerate_corner", prob, frozenset({LICQ, SSOSC, DEGENERATE}))


def hs006() -> CorpusEntry:
    def hess(x, mu):
        return np.array([[2.0 - 20.0 * mu[0], 0.0], [0.0, 0.0]])

    prob = NlpProblem(
        n=2, p=1, lower=[-10, -10], upper=[10, 10],
        eval_f=lambda x: (1.0 - x[0]) ** 2,
        eval_grad_f=lambda x: np.array([-2.0 * (1.0 - x[0]), 0.0]),
        eval_h=lambda x: np.array([10.0 * (x[1] - x[0] ** 2)]),
        eval_jac_h=lambda x: np.array([[-20.0 * x[0]], [10.0]]),
        eval_hess_lag=hess,
        x0=[-1.2, 1.0], known_solution=([1.0, 1.0], [0.0]), name="hs006",
    )
    return CorpusEntry("hs006", prob, REGULAR)


def hs007() -> CorpusEntry:
    def grad(x):
        return np.array([2 * x[0] / (1 + x[0] ** 2), -1.0])

    def hess(x, mu):
        t = 1 + x[0] ** 2
        return np.array([
            [2 * (1 - x[0] ** 2) / t ** 2 + mu[0] * (4 + 12 * x[0] ** 2), 0.0],
            [0.0, 2 * mu[0]],
        ])

    s3 = np.sqrt(3.0)
    prob = NlpProblem(
        n=2, p=1, lower=[-4, -4], upper=[4, 4],
        eval_f=lambda x: np.log(1 + x[0] ** 2) - x[1],
        eval_grad_f=grad,
        eval_h=lambda x: np.array([(1 + x[0] ** 2) ** 2 + x[1] ** 2 - 4.0]),
        eval_jac_h=lambda x: np.array([[4 * x[0] * (1 + x[0] ** 2)], [2 * x[1]]]),
        eval_hess_lag=hess,
        x0=[2.0, 2.0], known_solution=([0.0, s3], [1.0 / (2.0 * s3)]), name="hs007",
    )
    return CorpusEntry("hs007", prob, REGULAR)


def hs027() -> CorpusEntry:
    def grad(x):
        r = x[1] - x[0] ** 2
        return np.array([0.02 * (x[0] - 1) - 4 * x[0] * r, 2 * r, 0.0])

    def hess(x, mu):
        H = np.zeros((3, 3))
        H[0, 0] = 0.02 - 4 * (x[1] - x[0] ** 2) + 8 * x[0] ** 2
        H[0, 1] = H[1, 0] = -4 * x[0]
        H[1, 1] = 2.0
        H[2, 2] = 2 * mu[0]
        return H

    prob = NlpProblem(
        n=3, p=1, lower=[-5] * 3, upper=[5] * 3,
        eval_f=lambda x: 0.01 * (x[0] - 1) ** 2 + (x[1] - x[0] ** 2) ** 2,
        eval_grad_f=grad,
        eval_h=lambda x: np.array([x[0] + x[2] ** 2 + 1.0]),
        eval_jac_h=lambda x: np.array([[1.0], [0.0], [2 * x[2]]]),
        eval_hess_lag=hess,
        x0=[2.0, 2.0, 2.0], known_solution=([-1.0, 1.0, 0.0], [0.04]), name="hs027",
    )
    return CorpusEntry("hs027", prob, REGULAR)


def hs039() -> CorpusEntry:
    def jac(x):
        return np.array([
            [-3 * x[0] ** 2, 2 * x[0]],
            [1.0, -1.0],
            [-2 * x[2], 0.0],
            [0.0, -2 * x[3]],
        ])

    def hess(x, mu):
        return np.diag([-6 * x[0] * mu[0] + 2 * mu[1], 0.0, -2 * mu[0], -2 * mu[1]])

    prob = NlpProblem(
        n=4, p=2, lower=[-5] * 4, upper=[5] * 4,
        eval_f=lambda x: -x[0],
        eval_grad_f=lambda x: np.array([-1.0, 0.0, 0.0, 0.0]),
        eval_h=lambda x: np.array([x[1] - x[0] ** 3 - x[2] ** 2, x[0] ** 2 - x[1] - x[3] ** 2]),
        eval_jac_h=jac,
        eval_hess_lag=hess,
        x0=[2.0] * 4, known_solution=([1.0, 1.0, 0.0, 0.0], [-1.0, -1.0]), name="hs039",
    )
    return CorpusEntry("hs039", prob, REGULAR)


def hs040() -> CorpusEntry:
    def grad(x):
        a, b, c, d = x
        return -np.array([b * c * d, a * c * d, a * b * d, a * b * c])

    def jac(x):
        a, b, c, d = x
        return np.array([
            [3 * a ** 2, 2 * a * d, 0.0],
            [2 * b, 0.0, -1.0],
            [0.0, -1.0, 0.0],
            [0.0, a ** 2, 2 * d],
        ])

    def hess(x, mu):
        a, b, c, d = x
        H = -np.array([
            [0.0, c * d, b * d, b * c],
            [c * d, 0.0, a * d, a * c],
            [b * d, a * d, 0.0, a * b],
            [b * c, a * c, a * b, 0.0],
        ])
        H[0, 0] += 6 * a * mu[0] + 2 * d * mu[1]
        H[1, 1] += 2 * mu[0]
        H[0, 3] += 2 * a * mu[1]
        H[3, 0] += 2 * a * mu[1]
        H[3, 3] += 2 * mu[2]
        return H

    def cons(x):
        a, b, c, d = x
        return np.array([a ** 3 + b ** 2 - 1.0, a ** 2 * d - c, d ** 2 - b])

    xs = 2.0 ** np.array([-1 / 3, -1 / 2, -11 / 12, -1 / 4])
    prob = NlpProblem(
        n=4, p=3, lower=[-5] * 4, upper=[5] * 4,
        eval_f=lambda x: -np.prod(x),
        eval_grad_f=grad,
        eval_h=cons,
        eval_jac_h=jac,
        eval_hess_lag=hess,
        x0=[0.8] * 4, known_solution=(xs, _multipliers_at(xs, grad, jac)), name="hs040",
    )
    return CorpusEntry("hs040", prob, REGULAR)


def hs042() -> CorpusEntry:
    target = np.arange(1.0, 5.0)

    def hess(x, mu):
        return np.diag([2.0, 2.0, 2.0 + 2 * mu[1], 2.0 + 2 * mu[1]])

    xs = np.array([2.0, 2.0, 0.6 * np.sqrt(2.0), 0.8 * np.sqrt(2.0)])
    prob = NlpProblem(
        n=4, p=2, lower=[-5] * 4, upper=[5] * 4,
        eval_f=lambda x: float(np.sum((x - target) ** 2)),
        eval_grad_f=lambda x: 2 * (x - target),
        eval_h=lambda x: np.array([x[0] - 2.0, x[2] ** 2 + x[3] ** 2 - 2.0]),
        eval_jac_h=lambda x: np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 2 * x[2]], [0.0, 2 * x[3]]]),
        eval_hess_lag=hess,
        x0=[1.0] * 4, known_solution=(xs, [-2.0, 5.0 / np.sqrt(2.0) - 1.0]), name="hs042",
    )
    return CorpusEntry("hs042", prob, REGULAR)


def _hs48_family(name, Q, c, A, b, x0):
    lo, up = _box(5, -10, 10)
    return CorpusEntry(name, _quadratic_eq(name, Q, c, A, b, lo, up, x0), REGULAR, convex_eq_qp=True)


def hs048() -> CorpusEntry:
    # (x1-1)^2 + (x2-x3)^2 + (x4-x5)^2, constant term dropped
    Q = 2 * np.array([
        [1, 0, 0, 0, 0],
        [0, 1, -1, 0, 0],
        [0, -1, 1, 0, 0],
        [0, 0, 0, 1, -1],
        [0, 0, 0, -1, 1],
    ], dtype=float)
    c = np.array([-2.0, 0, 0, 0, 0])
    A = np.array([[1, 1, 1, 1, 1], [0, 0, 1, -2, -2]], dtype=float)
    return _hs48_family("hs048", Q, c, A, [5.0, -3.0], [3.0, 5.0, -3.0, 2.0, -2.0])


def hs051() -> CorpusEntry:
    # (x1-x2)^2 + (x2+x3-2)^2 + (x4-1)^2 + (x5-1)^2
    Q = 2 * np.array([
        [1, -1, 0, 0, 0],
        [-1, 2, 1, 0, 0],
        [0, 1, 1, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1],
    ], dtype=float)
    c = np.array([0.0, -4.0, -4.0, -2.0, -2.0])
    A = np.array([[1, 3, 0, 0, 0], [0, 0, 1, 1, -2], [0, 1, 0, 0, -1]], dtype=float)
    return _hs48_family("hs051", Q, c, A, [4.0, 0.0, 0.0], [2.5, 0.5, 2.0, -1.0, 0.5])


def hs052() -> CorpusEntry:
    # (4x1-x2)^2 + (x2+x3-2)^2 + (x4-1)^2 + (x5-1)^2
    Q = 2 * np.array([
        [16, -4, 0, 0, 0],
        [-4, 2, 1, 0, 0],
        [0, 1, 1, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1],
    ], dtype=float)
    c = np.array([0.0, -4.0, -4.0, -2.0, -2.0])
    A = np.array([[1, 3, 0, 0, 0], [0, 0, 1, 1, -2], [0, 1, 0, 0, -1]], dtype=float)
    return _hs48_family("hs052", Q, c, A, [0.0, 0.0, 0.0], [2.0] * 5)


def upper_active_qp() -> CorpusEntry:
    # unconstrained-by-bounds minimiser would be (2, 2, -1); the box cuts it
    target = np.array([3.0, 3.0, 0.0])
    prob = NlpProblem(
        n=3, p=1, lower=[-2] * 3, upper=[1.5] * 3,
        eval_f=lambda x: float(np.sum((x - target) ** 2)),
        eval_grad_f=lambda x: 2 * (x - target),
        eval_h=lambda x: np.array([np.sum(x) - 3.0]),
        eval_jac_h=lambda x: np.ones((3, 1)),
        eval_hess_lag=lambda x, mu: 2.0 * np.eye(3),
        x0=[0.0, 0.0, 0.0], known_solution=([1.5, 1.5, 0.0], [0.0]), name="upper_active_qp",
    )
    return CorpusEntry("upper_active_qp", prob, REGULAR)


def bound_only_vertex() -> CorpusEntry:
    # no equality constraints, every variable ends on a bound
    target = np.array([-1.0, 3.0, -2.0, 4.0])
    prob = NlpProblem(
        n=4, p=0, lower=[0] * 4, upper=[2] * 4,
        eval_f=lambda x: float(np.sum((x - target) ** 2)),
        eval_grad_f=lambda x: 2 * (x - target),
        eval_h=lambda x: np.zeros(0),
        eval_jac_h=lambda x: np.zeros((4, 0)),
        eval_hess_lag=lambda x, mu: 2.0 * np.eye(4),
        x0=[1.0] * 4, known_solution=([0.0, 2.0, 0.0, 2.0], []), name="bound_only_vertex",
    )
    return CorpusEntry("bound_only_vertex", prob, REGULAR)


def _unconstrained(name, n, lower, upper, f, grad, hess, x0):
    return NlpProblem(
        n=n, p=0, lower=lower, upper=upper, eval_f=f, eval_grad_f=grad,
        eval_h=lambda x: np.zeros(0), eval_jac_h=lambda x: np.zeros((n, 0)),
        eval_hess_lag=lambda x, mu: hess(x), x0=x0, name=name,
    )


def ineq_halfline() -> CorpusEntry:
    # min x  s.t.  x >= 0.5, box [0, 2]
    base = _unconstrained("ineq_halfline", 1, [0.0], [2.0], lambda x: float(x[0]),
                          lambda x: np.ones(1), lambda x: np.zeros((1, 1)), [1.5])
    prob = reformulate_inequalities(
        base,
        g=lambda x: np.array([0.5 - x[0]]),
        jac_g=lambda x: np.array([[-1.0]]),
        hess_g=lambda x, lam: np.zeros((1, 1)),
        q=1,
        known_solution=([0.5, 0.0], [1.0]),
    )
    return CorpusEntry("ineq_halfline", prob, REGULAR, from_inequalities=True)


def hs021_ineq() -> CorpusEntry:
    # min 0.01 x1^2 + x2^2 - 100  s.t.  10 x1 - x2 >= 10
    base = _unconstrained(
        "hs021_ineq", 2, [2.0, -50.0], [50.0, 50.0],
        lambda x: 0.01 * x[0] ** 2 + x[1] ** 2 - 100.0,
        lambda x: np.array([0.02 * x[0], 2 * x[1]]),
        lambda x: np.diag([0.02, 2.0]),
        [2.0, -1.0],
    )
    prob = reformulate_inequalities(
        base,
        g=lambda x: np.array([10.0 + x[1] - 10.0 * x[0]]),
        jac_g=lambda x: np.array([[-10.0], [1.0]]),
        hess_g=lambda x, lam: np.zeros((2, 2)),
        q=1,
        known_solution=([2.0, 0.0, 10.0], [0.0]),
    )
    return CorpusEntry("hs021_ineq", prob, REGULAR, from_inequalities=True)


def hs035_ineq() -> CorpusEntry:
    Q = np.array([[4.0, 2.0, 2.0], [2.0, 4.0, 0.0], [2.0, 0.0, 2.0]])
    c = np.array([-8.0, -6.0, -4.0])
    base = _unconstrained(
        "hs035_ineq", 3, [0.0] * 3, [10.0] * 3,
        lambda x: 9.0 + c @ x + 0.5 * x @ Q @ x,
        lambda x: Q @ x + c,
        lambda x: Q.copy(),
        [0.5] * 3,
    )
    a = np.array([1.0, 1.0, 2.0])
    prob = reformulate_inequalities(
        base,
        g=lambda x: np.array([a @ x - 3.0]),
        jac_g=lambda x: a.reshape(3, 1),
        hess_g=lambda x, lam: np.zeros((3, 3)),
        q=1,
        known_solution=([4 / 3, 7 / 9, 4 / 9, 0.0], [2 / 9]),
    )
    return CorpusEntry("hs035_ineq", prob, REGULAR, from_inequalities=True)


def block_sum_qp_100() -> CorpusEntry:
    # min 1/2 ||x - c||^2  s.t. ten disjoint block sums fixed
    n, p = 100, 10
    c = 2.0 * np.sin(np.arange(1, n + 1))
    A = np.kron(np.eye(p), np.ones((1, n // p)))
    b = 1.0 + 0.1 * np.arange(p)
    lo, up = _box(n, -10, 10)
    prob = _quadratic_eq("block_sum_qp_100", np.eye(n), -c, A, b, lo, up, np.zeros(n))
    # closed form, since A A^T = 10 I
    mu = (A @ c - b) / 10.0
    prob = NlpProblem(**{**prob.__dict__, "known_solution": (c - A.T @ mu, mu)})
    return CorpusEntry("block_sum_qp_100", prob, REGULAR, convex_eq_qp=True)


def sphere_linear_100() -> CorpusEntry:
    # min sum(x)  s.t. ||x||^2 = n; solution x = -1, mu = 1/2
    n = 100
    prob = NlpProblem(
        n=n, p=1, lower=[-2.0] * n, upper=[2.0] * n,
        eval_f=lambda x: float(np.sum(x)),
        eval_grad_f=lambda x: np.ones(n),
        eval_h=lambda x: np.array([x @ x - n]),
        eval_jac_h=lambda x: 2.0 * x.reshape(n, 1),
        eval_hess_lag=lambda x, mu: 2.0 * mu[0] * np.eye(n),
        x0=0.5 + 0.3 * np.cos(np.arange(n)),
        known_solution=(-np.ones(n), [0.5]),
        name="sphere_linear_100",
    )
    return CorpusEntry("sphere_linear_100", prob, REGULAR)


def hs078() -> CorpusEntry:
    def grad(x):
        return np.array([np.prod(np.delete(x, i)) for i in range(5)])

    def hess_f(x):
        H = np.zeros((5, 5))
        for i in range(5):
            for j in range(5):
                if i != j:
                    H[i, j] = np.prod(np.delete(x, [i, j]))
        return H

    def jac(x):
        J = np.zeros((5, 3))
        J[:, 0] = 2 * x
        J[1, 1], J[2, 1], J[3, 1], J[4, 1] = x[2], x[1], -5 * x[4], -5 * x[3]
        J[0, 2], J[1, 2] = 3 * x[0] ** 2, 3 * x[1] ** 2
        return J

    def hess(x, mu):
        H = hess_f(x) + 2 * mu[0] * np.eye(5)
        H[1, 2] += mu[1]
        H[2, 1] += mu[1]
        H[3, 4] -= 5 * mu[1]
        H[4, 3] -= 5 * mu[1]
        H[0, 0] += 6 * x[0] * mu[2]
        H[1, 1] += 6 * x[1] * mu[2]
        return H

    prob = NlpProblem(
        n=5, p=3, lower=[-5] * 5, upper=[5] * 5,
        eval_f=lambda x: float(np.prod(x)),
        eval_grad_f=grad,
        eval_h=lambda x: np.array([x @ x - 10.0, x[1] * x[2] - 5 * x[3] * x[4], x[0] ** 3 + x[1] ** 3 + 1.0]),
        eval_jac_h=jac,
        eval_hess_lag=hess,
        x0=[-2.0, 1.5, 2.0, -1.0, -1.0], name="hs078",
    )
    return CorpusEntry("hs078", prob, frozenset())


_BUILDERS = (
    eq_quadratic_2d, circle_corner, degenerate_corner, hs006, hs007, hs027, hs039,
    hs040, hs042, hs048, hs051, hs052, upper_active_qp, bound_only_vertex,
    ineq_halfline, hs021_ineq, hs035_ineq, block_sum_qp_100, sphere_linear_100, hs078,
)


@lru_cache(maxsize=None)
def _corpus() -> tuple[CorpusEntry, ...]:
    entries = tuple(build() for build in _BUILDERS)
    names = [e.name for e in entries]
    assert len(set(names)) == len(names), "duplicate corpus names"
    return entries


def corpus() -> list[CorpusEntry]:
    """All registered test problems, in a fixed order."""
    return list(_corpus())


def get(name: str) -> CorpusEntry:
    for entry in _corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"unknown problem {name!r}")


def names() -> list[str]:
    return [e.name for e in _corpus()]
