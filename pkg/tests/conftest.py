import numpy as np
import pytest

from pdalm import corpus
from pdalm.model import NlpProblem


def scalar_problem(f, g, h=None, jh=None, hess=None, lower=-10.0, upper=10.0, x0=0.0):
    """One-variable problem; ``h`` may be omitted for p=0."""
    p = 0 if h is None else 1
    return NlpProblem(
        n=1, p=p, lower=[lower], upper=[upper],
        eval_f=lambda x: f(x[0]),
        eval_grad_f=lambda x: np.array([g(x[0])]),
        eval_h=(lambda x: np.array([h(x[0])])) if h else (lambda x: np.zeros(0)),
        eval_jac_h=(lambda x: np.array([[jh(x[0])]])) if jh else (lambda x: np.zeros((1, 0))),
        eval_hess_lag=hess or (lambda x, mu: np.zeros((1, 1))),
        x0=[x0],
    )


def true_active_sets(problem):
    xs, _ = problem.known_solution
    lower = np.flatnonzero(xs == problem.lower)
    upper = np.flatnonzero(xs == problem.upper)
    return lower, upper


@pytest.fixture(scope="session")
def entries():
    return corpus.corpus()


@pytest.fixture(scope="session")
def solved_entries():
    return [e for e in corpus.corpus() if e.problem.known_solution is not None]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
