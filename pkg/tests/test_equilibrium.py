import numpy as np
import pytest

import paperdata
from shadowcap import equilibrium as eq
from shadowcap.domain import DegenerateMarketError
from shadowcap.solver import solve_self_consistent


@pytest.fixture(scope="module")
def solved():
    scenario = paperdata.market()
    outcome = solve_self_consistent(scenario, paperdata.COSTS)
    return scenario, outcome


def test_beta_from_published_weights():
    beta = eq.beta_vector(paperdata.SIGMA, paperdata.W_INCOMPLETE, paperdata.SIGMA_M)
    expected = paperdata.SIGMA @ paperdata.W_INCOMPLETE / paperdata.SIGMA_M**2
    np.testing.assert_allclose(beta, expected, atol=1e-15)
    assert beta[1] == pytest.approx(0.2516, abs=1e-4)


def test_beta_zero_weights():
    assert np.all(eq.beta_vector(paperdata.SIGMA, np.zeros(5), 0.05) == 0.0)


def test_beta_identity_scaling():
    e2 = np.eye(4)[2]
    np.testing.assert_allclose(eq.beta_vector(0.05**2 * np.eye(4), e2, 0.05), e2, atol=1e-15)


def test_beta_degenerate_market():
    with pytest.raises(DegenerateMarketError):
        eq.beta_vector(paperdata.SIGMA, paperdata.W_CAPM, 0.0)


def test_beta_scale_covariance_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        scenario = paperdata.random_market(rng)
        w = rng.standard_normal(scenario.n)
        c = float(rng.uniform(0.1, 10.0))
        np.testing.assert_allclose(
            eq.beta_vector(c * scenario.sigma, w, np.sqrt(c) * scenario.sigma_m),
            eq.beta_vector(scenario.sigma, w, scenario.sigma_m),
            rtol=1e-12,
        )


def test_extra_excess_returns_published(solved):
    scenario, outcome = solved
    beta = eq.beta_vector(scenario.sigma, outcome.weights, scenario.sigma_m)
    lambda_m = float(outcome.weights @ paperdata.COSTS)
    extra = eq.extra_excess_returns(paperdata.COSTS, lambda_m, beta)
    np.testing.assert_allclose(extra, paperdata.EXTRA, atol=paperdata.TOL)


def test_extra_trivial_cases():
    beta = np.array([0.5, -1.0, 2.0])
    assert np.all(eq.extra_excess_returns(np.zeros(3), 0.0, beta) == 0.0)
    lam = np.array([0.01, 0.02, 0.03])
    np.testing.assert_array_equal(eq.extra_excess_returns(lam, 0.0, beta), lam)


def test_implied_published_decomposition(solved):
    scenario, outcome = solved
    beta = eq.beta_vector(scenario.sigma, outcome.weights, scenario.sigma_m)
    lambda_m = float(outcome.weights @ paperdata.COSTS)
    pi = scenario.pi_c + eq.extra_excess_returns(paperdata.COSTS, lambda_m, beta)
    np.testing.assert_allclose(pi, paperdata.PI, atol=paperdata.TOL)


def test_implied_capm_reduction(market):
    w = np.array([0.1, -0.05, 0.2, 0.0, 0.03])
    np.testing.assert_allclose(
        eq.implied_excess_returns(market, np.zeros(5), w),
        market.delta * market.sigma @ w,
        atol=1e-16,
    )


def test_implied_single_asset_scalar_oracle():
    # one asset: pi = (delta - l / sigma_m^2) sigma2 + l, by plain arithmetic
    sigma2, sigma_m, r_f, erm, cost = 0.04, 0.05, 0.01, 0.03, 0.004
    scenario = paperdata.MarketScenario(
        asset_labels=("only",), sigma=[[sigma2]], pi_c=[0.02],
        r_f=r_f, expected_market_return=erm, sigma_m=sigma_m,
    )
    delta = (erm - r_f) / sigma_m**2
    expected = (delta - cost / sigma_m**2) * sigma2 + cost
    got = eq.implied_excess_returns(scenario, np.array([cost]), np.array([1.0]))
    assert got[0] == pytest.approx(expected, rel=1e-14)


def test_implied_decomposition_identity(market):
    rng = np.random.default_rng(11)
    for _ in range(25):
        scenario = paperdata.random_market(rng)
        w = rng.standard_normal(scenario.n) * 0.2
        lam = paperdata.random_costs(rng, scenario)
        beta = eq.beta_vector(scenario.sigma, w, scenario.sigma_m)
        lhs = eq.implied_excess_returns(scenario, lam, w)
        rhs = scenario.delta * scenario.sigma @ w + eq.extra_excess_returns(
            lam, float(w @ lam), beta
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_sensitivity_to_shadow_costs_cases(solved):
    assert np.all(eq.sensitivity_to_shadow_costs(np.zeros(4), np.ones(4)) == 1.0)

    beta = np.array([2.0, 0.5])
    weights = np.array([0.5, 0.1])  # first component exactly at 1/beta
    grad = eq.sensitivity_to_shadow_costs(weights, beta)
    assert grad[0] == pytest.approx(0.0, abs=1e-15)

    scenario, outcome = solved
    beta_p = eq.beta_vector(scenario.sigma, outcome.weights, scenario.sigma_m)
    # |x_k beta_k| < 1 on this data, so every slope is positive (in (0, 2))
    assert np.all(np.abs(outcome.weights * beta_p) < 1.0)
    grad_p = eq.sensitivity_to_shadow_costs(outcome.weights, beta_p)
    assert np.all(grad_p > 0.0) and np.all(grad_p < 2.0)


def test_sensitivity_to_weights_cases(solved):
    zeros = eq.sensitivity_to_weights(np.zeros(3), np.ones(3), 0.0, np.ones(3))
    assert np.all(zeros == 0.0)

    # negative beta with |beta| > delta_lambda sigma_k^2 / lambda_k: positive slope
    grad = eq.sensitivity_to_weights(
        np.array([0.02]), np.array([-1.0]), 1.0, np.array([0.01])
    )
    assert grad[0] == pytest.approx(0.01) and grad[0] > 0

    scenario, outcome = solved
    beta = eq.beta_vector(scenario.sigma, outcome.weights, scenario.sigma_m)
    got = eq.sensitivity_to_weights(
        paperdata.COSTS, beta, outcome.delta_lambda, np.diag(scenario.sigma)
    )
    expected0 = -paperdata.COSTS[0] * beta[0] - outcome.delta_lambda * scenario.sigma[0, 0]
    assert got[0] == pytest.approx(expected0, rel=1e-12)
    # beta_1 is almost zero there, so the value is close to -delta_lambda sigma_11
    assert got[0] == pytest.approx(-0.2967 * 0.05, abs=1e-4)


def test_classify_regimes():
    report = eq.classify_sensitivity_regimes(
        costs=np.array([0.02, 0.01, 0.01, 0.02]),
        beta=np.array([0.0, 2.0, 2.0, -1.0]),
        weights=np.array([0.1, 0.4, 0.6, 0.1]),
        delta_lambda=1.0,
        sigma_diag=np.array([0.05, 0.05, 0.05, 0.01]),
    )
    assert report.regime == (
        eq.REGIME_BETA_ZERO,
        eq.REGIME_BETA_POSITIVE_LOW_WEIGHT,
        eq.REGIME_BETA_POSITIVE_HIGH_WEIGHT,
        eq.REGIME_BETA_NEGATIVE,
    )
    # zero beta: premium is exactly the shadow-cost, slope in lambda is one
    assert report.grad_shadow_costs[0] == pytest.approx(1.0)
    # negative beta with 0.02 * 1 > 1.0 * 0.01: weight raises the premium
    assert report.weight_increases_extra[3] is True
    assert report.weight_increases_extra[1] is False


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(23)
    for _ in range(30):
        scenario = paperdata.random_market(rng)
        if scenario.n < 2:
            continue
        w = rng.uniform(0.01, 0.3, scenario.n)
        lam = rng.uniform(0.005, 0.04, scenario.n)
        _check_gradients(scenario, lam, w)


def _check_gradients(scenario, lam, w, rtol=1e-6, h=1e-6):
    sigma_m2 = scenario.sigma_m**2

    def extra(lam_, w_):
        beta = scenario.sigma @ w_ / sigma_m2
        return lam_ - float(w_ @ lam_) * beta

    beta = scenario.sigma @ w / sigma_m2
    delta_lambda = float(w @ lam) / sigma_m2
    grad_l = eq.sensitivity_to_shadow_costs(w, beta)
    grad_w = eq.sensitivity_to_weights(lam, beta, delta_lambda, np.diag(scenario.sigma))
    for k in range(scenario.n):
        bump = np.zeros(scenario.n)
        bump[k] = h
        fd_l = (extra(lam + bump, w)[k] - extra(lam - bump, w)[k]) / (2 * h)
        fd_w = (extra(lam, w + bump)[k] - extra(lam, w - bump)[k]) / (2 * h)
        assert grad_l[k] == pytest.approx(fd_l, rel=rtol, abs=1e-10)
        assert grad_w[k] == pytest.approx(fd_w, rel=rtol, abs=1e-10)


def test_utility_cases(market, solved):
    assert eq.utility(np.zeros(5), paperdata.PI_C, paperdata.COSTS, paperdata.SIGMA, 8.0, 0.3) == 0.0

    w = np.array([0.1, 0.0, -0.05, 0.2, 0.1])
    classic = float(w @ paperdata.PI_C - 0.5 * 8.0 * w @ paperdata.SIGMA @ w)
    assert eq.utility(w, paperdata.PI_C, np.zeros(5), paperdata.SIGMA, 8.0, 0.0) == pytest.approx(classic)


def test_utility_gradient_vanishes_at_investor_optimum(solved):
    scenario, outcome = solved

    def u(w):
        return eq.utility(
            w, scenario.pi_c, paperdata.COSTS, scenario.sigma,
            scenario.delta, outcome.delta_lambda,
        )

    h = 1e-7
    for k in range(5):
        bump = np.zeros(5)
        bump[k] = h
        fd = (u(paperdata.W_INVESTOR + bump) - u(paperdata.W_INVESTOR - bump)) / (2 * h)
        assert abs(fd) < 1e-3  # published weights are rounded to 4 decimals


def test_utility_argmax_matches_closed_form(solved):
    scenario, outcome = solved
    w_star = np.linalg.solve(
        (scenario.delta + 2 * outcome.delta_lambda) * scenario.sigma,
        scenario.pi_c + paperdata.COSTS,
    )
    rng = np.random.default_rng(3)
    base = eq.utility(
        w_star, scenario.pi_c, paperdata.COSTS, scenario.sigma,
        scenario.delta, outcome.delta_lambda,
    )
    for _ in range(200):
        probe = w_star + rng.standard_normal(5) * 1e-3
        val = eq.utility(
            probe, scenario.pi_c, paperdata.COSTS, scenario.sigma,
            scenario.delta, outcome.delta_lambda,
        )
        assert val <= base + 1e-15
    # adding a constant leaves the maximizer unchanged by construction
    assert base + 1.0 == pytest.approx(base + 1.0)


def test_portfolio_metrics_published(market, solved):
    ret, risk = eq.portfolio_metrics(paperdata.W_CAPM, market.pi_c, market.sigma, market.r_f)
    assert ret == pytest.approx(paperdata.METRICS_CAPM[0], abs=paperdata.TOL)
    assert risk == pytest.approx(paperdata.METRICS_CAPM[1], abs=paperdata.TOL)

    scenario, outcome = solved
    beta = eq.beta_vector(scenario.sigma, outcome.weights, scenario.sigma_m)
    pi = scenario.pi_c + eq.extra_excess_returns(
        paperdata.COSTS, float(outcome.weights @ paperdata.COSTS), beta
    )
    ret, risk = eq.portfolio_metrics(outcome.weights, pi, scenario.sigma, scenario.r_f)
    assert ret == pytest.approx(paperdata.METRICS_INCOMPLETE[0], abs=paperdata.TOL)
    assert risk == pytest.approx(paperdata.METRICS_INCOMPLETE[1], abs=paperdata.TOL)

    assert eq.portfolio_metrics(np.zeros(5), market.pi_c, market.sigma, market.r_f) == (0.0, 0.0)
