import numpy as np
import pytest

from pdalm import corpus
from pdalm.kkt import ActiveSetEstimate, estimate_active_sets, kkt_residual
from pdalm.model import NlpProblem
from pdalm.newton import NewtonTrial, acceptance_test, assemble_reduced_kkt, compute_trial


def _all_free(n):
    return ActiveSetEstimate(np.zeros(0, int), np.zeros(0, int), np.arange(n), 1e-6)


def _quad(Q, c, lo=-10.0, up=10.0):
    Q, c = np.asarray(Q, float), np.asarray(c, float)
    n = c.size
    return NlpProblem(
        n=n, p=0, lower=np.full(n, lo), upper=np.full(n, up),
        eval_f=lambda x: 0.5 * x @ Q @ x + c @ x, eval_grad_f=lambda x: Q @ x + c,
        eval_h=lambda x: np.zeros(0), eval_jac_h=lambda x: np.zeros((n, 0)),
        eval_hess_lag=lambda x, mu: Q.copy(), x0=np.zeros(n),
    )


def test_assemble_example():
    prob = corpus.get("eq_quadratic_2d").problem
    K, rhs = assemble_reduced_kkt(prob, [0.0, 0.0], [0.0], _all_free(2))
    np.testing.assert_array_equal(K, [[1, 0, 1], [0, 1, 1], [1, 1, 0]])
    np.testing.assert_array_equal(rhs, [0, 0, 1])


def test_assemble_empty_free_set():
    prob = corpus.get("eq_quadratic_2d").problem
    act = ActiveSetEstimate(np.array([0, 1]), np.zeros(0, int), np.zeros(0, int), 1e-6)
    K, rhs = assemble_reduced_kkt(prob, [0.2, 0.3], [0.0], act)
    np.testing.assert_array_equal(K, np.zeros((1, 1)))
    np.testing.assert_allclose(rhs, -prob.h(np.array([0.2, 0.3])))


def test_assemble_rhs_vanishes_at_kkt_point(solved_entries):
    for e in solved_entries:
        xs, ms = e.problem.known_solution
        act = estimate_active_sets(e.problem, xs, ms, 1e-6)
        _, rhs = assemble_reduced_kkt(e.problem, xs, ms, act)
        assert np.max(np.abs(rhs), initial=0.0) <= 1e-12, e.name


def test_trial_example_eq_quadratic():
    prob = corpus.get("eq_quadratic_2d").problem
    t = compute_trial(prob, [0.0, 0.0], [0.0])
    assert t.available
    np.testing.assert_allclose(t.d_x_free, [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(t.d_mu, [-0.5], atol=1e-14)
    np.testing.assert_allclose(t.x_trial, [0.5, 0.5], atol=1e-14)
    stat, feas = kkt_residual(prob, t.x_trial, t.d_mu)
    assert stat <= 1e-12 and feas <= 1e-12


def test_trial_unconstrained_quadratic_is_exact():
    Q = np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]])
    c = np.array([1.0, -2.0, 0.5])
    prob = _quad(Q, c)
    t = compute_trial(prob, np.array([0.3, -0.2, 0.1]), np.zeros(0))
    np.testing.assert_allclose(t.x_trial, np.linalg.solve(Q, -c), atol=1e-12)


def test_trial_singular_reduced_hessian():
    prob = _quad(np.zeros((2, 2)), [0.0, 0.0])
    t = compute_trial(prob, np.array([0.5, 0.5]), np.zeros(0), _all_free(2))
    assert not t.available
    with pytest.raises(ValueError):
        acceptance_test(t, 1.0, 0.5, 1.0)


def test_trial_pins_active_and_stays_in_box(entries):
    rng = np.random.default_rng(0)
    for e in entries:
        p = e.problem
        for _ in range(5):
            x = p.lower + rng.random(p.n) * np.minimum(p.upper - p.lower, 10.0)
            mu = rng.standard_normal(p.p)
            t = compute_trial(p, x, mu)
            if not t.available:
                continue
            a = t.active
            assert np.all((p.lower <= t.x_trial) & (t.x_trial <= p.upper))
            np.testing.assert_array_equal(t.x_trial[a.lower_active], p.lower[a.lower_active])
            np.testing.assert_array_equal(t.x_trial[a.upper_active], p.upper[a.upper_active])


def _stub(norm, feas):
    return NewtonTrial(available=True, active=_all_free(1), d_x_free=np.zeros(1), d_mu=np.zeros(0),
                       x_trial=np.zeros(1), acceptance_norm=norm, trial_feasibility=feas)


def test_acceptance_examples():
    assert acceptance_test(_stub(0.5, 0.9), 1.0, 0.5, 1.0, strict_feasibility_check=False)
    assert not acceptance_test(_stub(0.5, 0.9), 1.0, 0.5, 1.0, strict_feasibility_check=True)
    assert acceptance_test(_stub(0.5, 0.4), 1.0, 0.5, 1.0, strict_feasibility_check=True)
    assert not acceptance_test(_stub(2.0, 0.0), 1.0, 0.5, 1.0, strict_feasibility_check=False)
    assert not acceptance_test(_stub(2.0, 0.0), 1.0, 0.5, 1.0, strict_feasibility_check=True)
