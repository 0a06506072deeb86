"""
Inequality constraints through slack variables
==============================================

The solver handles equalities and bounds only. An inequality g(x) <= 0
becomes g(x) + s = 0 with a bounded slack s >= 0.

Here: minimise (x1 - 2)^2 + (x2 - 1)^2 subject to x1 + x2 <= 2.
"""

import numpy as np

from pdalm import NlpProblem, reformulate_inequalities, solve, validate

base = NlpProblem(
    n=2, p=0, lower=[-5, -5], upper=[5, 5],
    eval_f=lambda x: (x[0] - 2) ** 2 + (x[1] - 1) ** 2,
    eval_grad_f=lambda x: np.array([2 * (x[0] - 2), 2 * (x[1] - 1)]),
    eval_h=lambda x: np.zeros(0),
    eval_jac_h=lambda x: np.zeros((2, 0)),
    eval_hess_lag=lambda x, mu: 2 * np.eye(2),
    x0=[0.0, 0.0],
)

problem = reformulate_inequalities(
    base,
    g=lambda x: np.array([x[0] + x[1] - 2]),
    jac_g=lambda x: np.ones((2, 1)),
    hess_g=lambda x, lam: np.zeros((2, 2)),
    q=1,
)

###############################################################################
# Always worth checking derivatives against finite differences before
# solving.

print(validate(problem).issues or "derivatives agree with finite differences")

report = solve(problem)
x, s = report.final.x[:2], report.final.x[2]
print(report.status, "x =", x, "slack =", s)
print("analytic answer: x = (1.5, 0.5), slack = 0")
