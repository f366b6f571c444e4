"""Acceptance suite: every exit criterion at its stated tolerance.

Each test records its criterion id; the terminal summary prints one
pass/fail line per criterion (see conftest).
"""

import time
import warnings

import numpy as np
import pytest

import paperdata
from shadowcap import allocation as alloc
from shadowcap import equilibrium as eq
from shadowcap import solver
from shadowcap.domain import ViewSet
from shadowcap.pipeline import run_pipeline
from shadowcap.reference import ReferenceModel, sample_posterior, sigma_gamma
from shadowcap.scenario import load_paper_scenario
from shadowcap.views import bl_posterior, omega_from_confidence, posterior

TOL = paperdata.TOL  # 5e-4 vs 4-decimal published values


@pytest.fixture(scope="module")
def bundle():
    return run_pipeline(load_paper_scenario())


@pytest.fixture(scope="module")
def scenario():
    return paperdata.market()


def test_t4_capm(record_property, scenario, bundle):
    record_property("criterion", "T4-capm")
    w = solver.capm_weights(scenario)
    np.testing.assert_allclose(w, paperdata.W_CAPM, atol=TOL)
    ret, risk = eq.portfolio_metrics(w, scenario.pi_c, scenario.sigma, scenario.r_f)
    assert ret == pytest.approx(paperdata.METRICS_CAPM[0], abs=TOL)
    assert risk == pytest.approx(paperdata.METRICS_CAPM[1], abs=TOL)


def test_t4_t5_self_consistent(record_property, scenario, bundle):
    record_property("criterion", "T4/T5-selfconsistent")
    outcome = solver.solve_self_consistent(scenario, paperdata.COSTS)
    np.testing.assert_allclose(outcome.weights, paperdata.W_INCOMPLETE, atol=TOL)
    lambda_m = float(outcome.weights @ paperdata.COSTS)
    assert lambda_m == pytest.approx(paperdata.LAMBDA_M, abs=1e-6)
    assert outcome.delta_lambda == pytest.approx(paperdata.DELTA_LAMBDA, abs=1e-4)
    np.testing.assert_allclose(bundle.extra, paperdata.EXTRA, atol=TOL)
    np.testing.assert_allclose(bundle.pi, paperdata.PI, atol=TOL)
    ret, risk = bundle.metrics_incomplete
    assert ret == pytest.approx(paperdata.METRICS_INCOMPLETE[0], abs=TOL)
    assert risk == pytest.approx(paperdata.METRICS_INCOMPLETE[1], abs=TOL)


def test_t4_investor(record_property, scenario, bundle):
    record_property("criterion", "T4-investor")
    outcome = solver.solve_self_consistent(scenario, paperdata.COSTS)
    w_star = solver.investor_optimal_portfolio(scenario, paperdata.COSTS, outcome.delta_lambda)
    np.testing.assert_allclose(w_star, paperdata.W_INVESTOR, atol=TOL)
    ret, risk = bundle.metrics_investor
    assert ret == pytest.approx(paperdata.METRICS_INVESTOR[0], abs=TOL)
    assert risk == pytest.approx(paperdata.METRICS_INVESTOR[1], abs=TOL)


def test_t6_reference(record_property, bundle):
    record_property("criterion", "T6-reference")
    for gamma in (0, 1):
        row = bundle.reference_rows[gamma]
        np.testing.assert_allclose(row.weights, paperdata.T6_WEIGHTS[gamma], atol=TOL)
        assert row.portfolio_return == pytest.approx(paperdata.T6_METRICS[gamma][0], abs=TOL)
        assert row.portfolio_risk == pytest.approx(paperdata.T6_METRICS[gamma][1], abs=TOL)


def test_t3_omega(record_property):
    record_property("criterion", "T3-omega")
    omega = omega_from_confidence(0.5, paperdata.P, paperdata.SIGMA)
    np.testing.assert_allclose(omega, paperdata.OMEGA_HALF, atol=TOL)
    for (i, j), expected in {
        (0, 0): 0.0900, (0, 1): -0.0600, (2, 2): 0.0908, (3, 3): 0.0600,
    }.items():
        assert omega[i, j] == pytest.approx(expected, abs=TOL)


def test_t7_posterior(record_property, bundle):
    record_property("criterion", "T7-posterior")
    for name in ("bl", "gamma0", "gamma1"):
        row = bundle.posterior_rows[name]
        np.testing.assert_allclose(row.mean, paperdata.T7_MEAN[name], atol=TOL)
        np.testing.assert_allclose(row.weights, paperdata.T7_WEIGHTS[name], atol=TOL)
        assert row.portfolio_return == pytest.approx(paperdata.T7_METRICS[name][0], abs=TOL)
        assert row.portfolio_risk == pytest.approx(paperdata.T7_METRICS[name][1], abs=TOL)


def test_newton_suite(record_property):
    record_property("criterion", "Newton suite")
    rng = np.random.default_rng(101)
    start = time.monotonic()
    for _ in range(100):
        market = paperdata.random_market(rng)
        pi = market.pi_c + rng.uniform(0.0, 0.01, market.n)
        costs = paperdata.random_costs_newton(rng, market, pi)
        outcome = solver.solve_given_pi(market, costs, pi)
        assert outcome.converged
        residual = solver.residual_F(outcome.weights, market, costs, pi)
        assert np.max(np.abs(residual)) < 1e-10

        probe = outcome.weights + rng.standard_normal(market.n) * 0.01
        J = solver.jacobian_F(probe, market, costs)
        J_fd = solver._finite_difference_jacobian(probe, market, costs, pi)
        denom = max(float(np.max(np.abs(J))), 1.0)
        assert np.max(np.abs(J - J_fd)) / denom < 1e-6
    assert time.monotonic() - start < 5.0


def test_reduction_suite(record_property, scenario):
    record_property("criterion", "Reduction suite")
    zeros = np.zeros(5)
    w_c = solver.capm_weights(scenario)

    outcome = solver.solve_self_consistent(scenario, zeros)
    np.testing.assert_allclose(outcome.weights, w_c, atol=1e-12)
    assert outcome.delta_lambda == 0.0

    np.testing.assert_allclose(
        eq.implied_excess_returns(scenario, zeros, w_c),
        scenario.delta * scenario.sigma @ w_c,
        atol=1e-12,
    )
    np.testing.assert_allclose(
        eq.extra_excess_returns(zeros, 0.0, scenario.sigma @ w_c), zeros, atol=1e-12
    )
    np.testing.assert_allclose(
        solver.investor_optimal_portfolio(scenario, zeros, 0.0), w_c, atol=1e-12
    )

    # with zero shadow costs the gamma=1 posterior is exactly the BL posterior
    views = paperdata.views()
    prior = ReferenceModel(gamma=1, mean=scenario.pi_c, covariance=0.5 * scenario.sigma)
    lhs = posterior(prior, views, scenario.sigma)
    rhs = bl_posterior(scenario, 0.5, views)
    np.testing.assert_allclose(lhs.mean, rhs.mean, atol=1e-12)
    np.testing.assert_allclose(lhs.covariance, rhs.covariance, atol=1e-12)

    # non-informative views collapse the posterior onto its prior
    loose = paperdata.views(omega=1e12 * omega_from_confidence(0.5, paperdata.P, paperdata.SIGMA))
    post = posterior(prior, loose)
    np.testing.assert_allclose(post.mean, prior.mean, rtol=1e-6)
    np.testing.assert_allclose(post.covariance, prior.covariance, rtol=1e-6)


def test_bayes_oracle(record_property):
    record_property("criterion", "Bayes oracle")
    rng = np.random.default_rng(103)
    for _ in range(50):
        a = rng.standard_normal((2, 2))
        cov = a @ a.T + 0.4 * np.eye(2)
        mean = rng.standard_normal(2) * 0.05
        P = rng.uniform(-1.0, 1.0, (1, 2))
        omega = np.array([[float(rng.uniform(0.01, 0.6))]])
        q = rng.standard_normal(1) * 0.05
        prior = ReferenceModel(gamma=1, mean=mean, covariance=cov)
        views = ViewSet(P=P, q=q, kinds=("relative",), omega=omega)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            post = posterior(prior, views)

        gain = cov @ P.T @ np.linalg.inv(P @ cov @ P.T + omega)
        cond_mean = mean + (gain @ (q - P @ mean)).ravel()
        cond_cov = cov - gain @ P @ cov
        np.testing.assert_allclose(post.mean, cond_mean, atol=1e-10)
        np.testing.assert_allclose(post.covariance, cond_cov, atol=1e-10)


def test_gradient_suite(record_property):
    record_property("criterion", "Gradient suite")
    rng = np.random.default_rng(107)
    h = 1e-6
    for _ in range(100):
        market = paperdata.random_market(rng)
        n = market.n
        w = rng.uniform(0.01, 0.3, n)
        lam = rng.uniform(0.005, 0.04, n)
        sigma_m2 = market.sigma_m**2

        def extra(lam_, w_):
            return lam_ - float(w_ @ lam_) * (market.sigma @ w_) / sigma_m2

        beta = market.sigma @ w / sigma_m2
        grad_l = eq.sensitivity_to_shadow_costs(w, beta)
        grad_w = eq.sensitivity_to_weights(
            lam, beta, float(w @ lam) / sigma_m2, np.diag(market.sigma)
        )
        for k in range(n):
            bump = np.zeros(n)
            bump[k] = h
            fd_l = (extra(lam + bump, w)[k] - extra(lam - bump, w)[k]) / (2 * h)
            fd_w = (extra(lam, w + bump)[k] - extra(lam, w - bump)[k]) / (2 * h)
            assert grad_l[k] == pytest.approx(fd_l, rel=1e-6, abs=1e-9)
            assert grad_w[k] == pytest.approx(fd_w, rel=1e-6, abs=1e-9)


def test_sampler(record_property, bundle):
    record_property("criterion", "Sampler")
    row = bundle.posterior_rows["gamma1"]
    n_draws = 100_000
    start = time.monotonic()
    draws = sample_posterior(row.mean, row.covariance, n_draws, seed=20)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0

    se = np.sqrt(np.diag(row.covariance) / n_draws)
    assert np.all(np.abs(draws.mean(axis=0) - row.mean) < 3 * se)
    sample_cov = np.cov(draws.T)
    np.testing.assert_allclose(sample_cov, row.covariance, rtol=0.05)
