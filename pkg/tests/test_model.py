import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdalm import corpus
from pdalm.kkt import kkt_residual
from pdalm.model import NlpProblem, fd_gradient, fd_jacobian, reformulate_inequalities, validate

from conftest import scalar_problem


def test_validate_flags_unordered_bounds():
    prob = scalar_problem(lambda x: x * x, lambda x: 2 * x, lower=1.0, upper=1.0, x0=1.0)
    rep = validate(prob)
    assert not rep.ok
    assert rep.unordered_bounds == [0]
    assert any("bounds not strictly ordered" in s for s in rep.issues)


def test_validate_exact_gradient_is_clean():
    prob = scalar_problem(lambda x: x * x, lambda x: 2 * x, hess=lambda x, mu: np.array([[2.0]]), x0=0.7)
    rep = validate(prob)
    assert rep.ok, rep.issues


def test_validate_flags_wrong_gradient_component():
    # second component off by 10%
    prob = NlpProblem(
        n=2, p=0, lower=[-5, -5], upper=[5, 5],
        eval_f=lambda x: x @ x, eval_grad_f=lambda x: np.array([2 * x[0], 2.2 * x[1]]),
        eval_h=lambda x: np.zeros(0), eval_jac_h=lambda x: np.zeros((2, 0)),
        eval_hess_lag=lambda x, mu: 2 * np.eye(2), x0=[3.0, 3.0],
    )
    rep = validate(prob)
    assert rep.bad_grad_components == [1]
    # |6.6 - 6| / 6
    assert rep.grad_rel_errors[1] == pytest.approx(0.1, rel=1e-6)


def test_validate_flags_x0_outside_box():
    prob = scalar_problem(lambda x: x, lambda x: 1.0, lower=0.0, upper=1.0, x0=2.0)
    assert validate(prob).x0_outside == [0]


def test_validate_flags_wrong_jacobian():
    prob = scalar_problem(lambda x: x, lambda x: 1.0, h=lambda x: x ** 2, jh=lambda x: 3 * x, x0=1.0)
    rep = validate(prob)
    assert rep.bad_jac_entries == [(0, 0)]


def test_reformulate_single_inequality():
    # x - 1 <= 0 on [-2, 2]
    base = scalar_problem(lambda x: x * x, lambda x: 2 * x, hess=lambda x, mu: np.array([[2.0]]),
                          lower=-2.0, upper=2.0, x0=0.0)
    prob = reformulate_inequalities(base, lambda x: np.array([x[0] - 1.0]), lambda x: np.array([[1.0]]),
                                    lambda x, lam: np.zeros((1, 1)), q=1, slack_upper=1e8)
    assert (prob.n, prob.p) == (2, 1)
    np.testing.assert_array_equal(prob.lower, [-2, 0])
    np.testing.assert_array_equal(prob.upper, [2, 1e8])
    z = np.array([0.3, 0.2])
    np.testing.assert_allclose(prob.h(z), [0.3 - 1 + 0.2])
    assert validate(prob, np.array([0.5, 1.0])).ok


def test_reformulate_empty_returns_base():
    base = scalar_problem(lambda x: x * x, lambda x: 2 * x)
    out = reformulate_inequalities(base, None, None, None, q=0)
    assert out is base


def test_reformulate_rejects_bad_slack_bound():
    base = scalar_problem(lambda x: x * x, lambda x: 2 * x)
    with pytest.raises(ValueError):
        reformulate_inequalities(base, lambda x: x, lambda x: np.eye(1), lambda x, lam: np.zeros((1, 1)), q=1,
                                 slack_upper=0.0)


def test_reformulated_halfline_kkt_solution():
    # min x s.t. 0.5 - x <= 0 on [0, 2]; analytic KKT (x, s) = (0.5, 0), mu = 1
    base = scalar_problem(lambda x: x, lambda x: 1.0, lower=0.0, upper=2.0, x0=1.0)
    prob = reformulate_inequalities(base, lambda x: np.array([0.5 - x[0]]), lambda x: np.array([[-1.0]]),
                                    lambda x, lam: np.zeros((1, 1)), q=1)
    stat, feas = kkt_residual(prob, np.array([0.5, 0.0]), np.array([1.0]))
    assert stat == 0 and feas == 0


def test_corpus_contract(entries):
    assert len(entries) >= 15
    assert len({e.name for e in entries}) == len(entries)
    for e in entries:
        rep = validate(e.problem)
        assert rep.ok, (e.name, rep.issues)


def test_corpus_known_solutions_are_kkt(solved_entries):
    for e in solved_entries:
        xs, ms = e.problem.known_solution
        stat, feas = kkt_residual(e.problem, xs, ms)
        assert stat <= 1e-8 and feas <= 1e-8, e.name


def test_corpus_named_examples():
    p = corpus.get("eq_quadratic_2d").problem
    np.testing.assert_allclose(p.known_solution[0], [0.5, 0.5])
    np.testing.assert_allclose(p.known_solution[1], [-0.5])
    c = corpus.get("circle_corner").problem
    np.testing.assert_allclose(c.known_solution[0], [np.sqrt(2), 0])
    np.testing.assert_allclose(c.known_solution[1], [-1 / (2 * np.sqrt(2))])
    with pytest.raises(KeyError):
        corpus.get("no_such_problem")


def _tag_oracle(problem):
    """Independent LICQ / strict complementarity / second-order check at x*."""
    xs, ms = problem.known_solution
    lo_act = np.flatnonzero(np.isclose(xs, problem.lower, atol=1e-12))
    up_act = np.flatnonzero(np.isclose(xs, problem.upper, atol=1e-12))
    act = np.concatenate([lo_act, up_act])
    n = problem.n
    E = np.eye(n)[:, act]
    G = np.hstack([problem.jac_h(xs), E])
    licq = np.linalg.matrix_rank(G) == G.shape[1]
    gL = problem.grad_f(xs) + problem.jac_h(xs) @ ms
    sc = bool(np.all(gL[lo_act] > 1e-10) and np.all(gL[up_act] < -1e-10))
    # reduced Hessian on the null space of the active constraint gradients
    H = problem.hess_lag(xs, ms)
    if G.shape[1] == 0:
        Z = np.eye(n)
    else:
        u, s, vt = np.linalg.svd(G.T)
        Z = vt[np.sum(s > 1e-10):].T
    ssosc = Z.shape[1] == 0 or np.linalg.eigvalsh(Z.T @ H @ Z).min() > 1e-10
    return licq, sc, ssosc


@pytest.mark.parametrize("name", [e.name for e in corpus.corpus() if e.problem.known_solution is not None])
def test_corpus_tags_match_oracle(name):
    entry = corpus.get(name)
    licq, sc, ssosc = _tag_oracle(entry.problem)
    assert (corpus.LICQ in entry.tags) == licq
    assert (corpus.SC in entry.tags) == sc
    if corpus.SSOSC in entry.tags:
        assert ssosc


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_fd_gradient_matches_analytic(v):
    x = np.array(v)
    f = lambda z: np.sin(z[0]) * z[1] + z[2] ** 3
    g = np.array([np.cos(x[0]) * x[1], np.sin(x[0]), 3 * x[2] ** 2])
    np.testing.assert_allclose(fd_gradient(f, x), g, rtol=1e-6, atol=1e-7)


def test_fd_jacobian_layout():
    x = np.array([1.0, 2.0])
    J = fd_jacobian(lambda z: np.array([z[0] * z[1], z[0] + 3 * z[1], z[1] ** 2]), x, 3)
    assert J.shape == (2, 3)
    np.testing.assert_allclose(J, [[2, 1, 0], [1, 3, 4]], atol=1e-8)
