"""Closed-form equilibrium quantities for the incomplete-information market.

Everything here is a pure function of its arguments. The modified risk
aversion ``delta_lambda`` is always passed in explicitly so callers control
which weights define the weighted-average shadow-cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DegenerateMarketError, MarketScenario

REGIME_BETA_NEGATIVE = "beta_negative"
REGIME_BETA_ZERO = "beta_zero"
REGIME_BETA_POSITIVE_LOW_WEIGHT = "beta_positive_low_weight"
REGIME_BETA_POSITIVE_HIGH_WEIGHT = "beta_positive_high_weight"

# |beta| below this counts as zero for regime classification only.
BETA_ZERO_ATOL = 1e-12


@dataclass(frozen=True)
class SensitivityReport:
    """Per-asset own-derivatives of the extra excess returns.

    ``grad_shadow_costs[k]`` is d(extra_k)/d(lambda_k) holding weights fixed;
    ``grad_weights[k]`` is d(extra_k)/d(x_k) holding shadow-costs fixed.
    ``weight_increases_extra[k]`` flags grad_weights[k] > 0, which for a
    negative-beta asset means a larger market weight raises its premium.
    """

    grad_shadow_costs: np.ndarray
    grad_weights: np.ndarray
    regime: tuple
    weight_increases_extra: tuple


def beta_vector(sigma: np.ndarray, weights: np.ndarray, sigma_m: float) -> np.ndarray:
    """Systematic risk of each asset against the market: Sigma w / sigma_m^2."""
    if sigma_m == 0:
        raise DegenerateMarketError("sigma_m = 0: beta is undefined")
    return np.asarray(sigma) @ np.asarray(weights) / sigma_m**2


def extra_excess_returns(costs: np.ndarray, lambda_m: float, beta: np.ndarray) -> np.ndarray:
    """Premium over CAPM earned for incomplete awareness: lambda - lambda_M * beta."""
    return np.asarray(costs) - lambda_m * np.asarray(beta)


def implied_excess_returns(
    scenario: MarketScenario, costs: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Equilibrium excess returns implied by the supplied weights.

    pi = (delta - lambda_M / sigma_m^2) Sigma w + lambda, with
    lambda_M = w . lambda computed from the weights actually given.
    """
    weights = np.asarray(weights, dtype=float)
    costs = np.asarray(costs, dtype=float)
    lambda_m = float(weights @ costs)
    coeff = scenario.delta - lambda_m / scenario.sigma_m**2
    return coeff * (scenario.sigma @ weights) + costs


def sensitivity_to_shadow_costs(weights: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """d(extra_k)/d(lambda_k) = 1 - x_k beta_k, per asset."""
    return 1.0 - np.asarray(weights) * np.asarray(beta)


def sensitivity_to_weights(
    costs: np.ndarray, beta: np.ndarray, delta_lambda: float, sigma_diag: np.ndarray
) -> np.ndarray:
    """d(extra_k)/d(x_k) = -lambda_k beta_k - delta_lambda sigma_k^2, per asset."""
    return -np.asarray(costs) * np.asarray(beta) - delta_lambda * np.asarray(sigma_diag)


def classify_sensitivity_regimes(
    costs: np.ndarray,
    beta: np.ndarray,
    weights: np.ndarray,
    delta_lambda: float,
    sigma_diag: np.ndarray,
) -> SensitivityReport:
    """Tag each asset by how its premium reacts to ownership and awareness.

    Zero-beta assets earn exactly their shadow-cost. Positive-beta assets
    split on whether the market weight is below or above 1/beta. Negative
    beta is one regime; whether more weight raises the premium is reported
    via the gradient-sign flag.
    """
    costs = np.asarray(costs, dtype=float)
    beta = np.asarray(beta, dtype=float)
    weights = np.asarray(weights, dtype=float)
    grad_l = sensitivity_to_shadow_costs(weights, beta)
    grad_w = sensitivity_to_weights(costs, beta, delta_lambda, sigma_diag)
    if not (np.all(np.isfinite(grad_l)) and np.all(np.isfinite(grad_w))):
        raise ValueError("non-finite sensitivity encountered")

    regimes = []
    for k in range(beta.shape[0]):
        if abs(beta[k]) <= BETA_ZERO_ATOL:
            regimes.append(REGIME_BETA_ZERO)
        elif beta[k] < 0:
            regimes.append(REGIME_BETA_NEGATIVE)
        elif weights[k] < 1.0 / beta[k]:
            regimes.append(REGIME_BETA_POSITIVE_LOW_WEIGHT)
        else:
            regimes.append(REGIME_BETA_POSITIVE_HIGH_WEIGHT)
    return SensitivityReport(
        grad_shadow_costs=grad_l,
        grad_weights=grad_w,
        regime=tuple(regimes),
        weight_increases_extra=tuple(bool(g > 0) for g in grad_w),
    )


def utility(
    weights: np.ndarray,
    pi_c: np.ndarray,
    costs: np.ndarray,
    sigma: np.ndarray,
    delta: float,
    delta_lambda: float,
) -> float:
    """Quadratic utility with the information-adjusted premium folded in:

    U(w) = w.(pi_c + lambda) - (delta + 2 delta_lambda)/2 * w.Sigma.w
    """
    w = np.asarray(weights, dtype=float)
    return float(w @ (np.asarray(pi_c) + np.asarray(costs))
                 - 0.5 * (delta + 2.0 * delta_lambda) * (w @ np.asarray(sigma) @ w))


def portfolio_metrics(
    weights: np.ndarray,
    excess_returns: np.ndarray,
    sigma: np.ndarray,
    r_f: float,
) -> tuple:
    """Total return and standard-deviation risk of a portfolio.

    return = w.(excess + r_f), risk = sqrt(w.Sigma.w). Published model
    portfolios report excess-only returns against the model covariance;
    pass r_f=0 and that covariance to reproduce them.
    """
    w = np.asarray(weights, dtype=float)
    ret = float(w @ (np.asarray(excess_returns) + r_f))
    variance = float(w @ np.asarray(sigma) @ w)
    return ret, float(np.sqrt(max(variance, 0.0)))
