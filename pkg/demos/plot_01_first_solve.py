"""
Solving a small constrained problem
===================================

Minimise x1 + x2 on the circle x1^2 + x2^2 = 2 with both variables in
[0, 2]. The minimiser sits on a corner where x2 hits its lower bound.
"""

import numpy as np

from pdalm import NlpProblem, SolverConfig, solve
from pdalm.driver import final_active_sets

problem = NlpProblem(
    n=2, p=1, lower=[0, 0], upper=[2, 2],
    eval_f=lambda x: x[0] + x[1],
    eval_grad_f=lambda x: np.ones(2),
    eval_h=lambda x: np.array([x @ x - 2.0]),
    eval_jac_h=lambda x: 2.0 * x.reshape(2, 1),   # columns are constraint gradients
    eval_hess_lag=lambda x, mu: 2.0 * mu[0] * np.eye(2),
    x0=[1.5, 0.5],
)

report = solve(problem, SolverConfig())
print(report.status, "after", report.outer_iterations, "outer iterations")
print("x  =", report.final.x)
print("mu =", report.final.mu_bar)

###############################################################################
# The trace records where each outer iteration started and which step it
# took. Early on the augmented Lagrangian subproblem does the work; once
# the iterate is close, Newton steps on the reduced KKT system take over.

for rec in report.trace:
    print(f"k={rec.k}  stat={rec.stationarity:.2e}  feas={rec.feasibility:.2e}  {rec.step_kind}")

active = final_active_sets(problem, report)
print("variables estimated at their lower bound:", active.lower_active)
