"""Market-portfolio solvers.

Two entry points with deliberately different contracts:

* :func:`solve_given_pi` runs Newton-Raphson on the literal residual
  F(W) = W - (W.lambda) W / (delta sigma_m^2) - (delta Sigma)^-1 (pi - lambda)
  for a caller-supplied excess-return vector.

* :func:`solve_self_consistent` reproduces the published equilibrium chain.
  The published weights solve W (delta - W.lambda / sigma_m) = Sigma^-1
  (pi_c - lambda): the self-consistency coefficient there divides the
  weighted-average shadow-cost by sigma_m, not sigma_m^2, and the prior
  CAPM vector stands in for pi. Both quirks were pinned down by reproducing
  the published five-asset benchmark to four decimals; the reported
  delta_lambda still follows its definition lambda_M / sigma_m^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .domain import (
    FactorizationError,
    MarketScenario,
    NoRealEquilibriumError,
)

INITIAL_GUESS_CAPM = "capm_weights"
INITIAL_GUESS_ZEROS = "zeros"

JACOBIAN_ANALYTIC = "analytic"
JACOBIAN_FINITE_DIFFERENCE = "finite_difference"

# Tikhonov bump applied once when the Newton step matrix is singular.
_JACOBIAN_RIDGE = 1e-10
_FD_STEP = 1e-7


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    residual_tolerance: float = 1e-12
    step_tolerance: float = 1e-14
    jacobian_mode: str = JACOBIAN_ANALYTIC
    initial_guess: Union[str, np.ndarray] = INITIAL_GUESS_CAPM

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.residual_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.jacobian_mode not in (JACOBIAN_ANALYTIC, JACOBIAN_FINITE_DIFFERENCE):
            raise ValueError(f"unknown jacobian mode {self.jacobian_mode!r}")


@dataclass(frozen=True)
class SolveOutcome:
    weights: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool
    delta_lambda: float


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    try:
        return np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"{what} is singular") from exc


def quadratic_term_matrix_form(W: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """D_lambda W^2 + D_W (M_lambda - D_lambda) W, written out with the
    rank-one lambda matrix. Algebraically equal to (W.lambda) * W; kept as an
    independent route for cross-checking the residual."""
    W = np.asarray(W, dtype=float)
    costs = np.asarray(costs, dtype=float)
    n = W.shape[0]
    m_lambda = np.tile(costs, (n, 1))
    off_diag = m_lambda - np.diag(costs)
    return costs * W**2 + W * (off_diag @ W)


def residual_F(
    W: np.ndarray, scenario: MarketScenario, costs: np.ndarray, pi: np.ndarray
) -> np.ndarray:
    """F(W) = W - (W.lambda) W / (delta sigma_m^2) - (delta Sigma)^-1 (pi - lambda)."""
    W = np.asarray(W, dtype=float)
    costs = np.asarray(costs, dtype=float)
    affine = _solve_spd(scenario.delta * scenario.sigma, np.asarray(pi) - costs, "sigma")
    return W - (W @ costs) * W / (scenario.delta * scenario.sigma_m**2) - affine


def jacobian_F(W: np.ndarray, scenario: MarketScenario, costs: np.ndarray) -> np.ndarray:
    """Analytic Jacobian: I (1 - W.lambda/(delta sigma_m^2)) - W lambda' / (delta sigma_m^2)."""
    W = np.asarray(W, dtype=float)
    costs = np.asarray(costs, dtype=float)
    scale = scenario.delta * scenario.sigma_m**2
    n = W.shape[0]
    return np.eye(n) * (1.0 - (W @ costs) / scale) - np.outer(W, costs) / scale


def _finite_difference_jacobian(W, scenario, costs, pi):
    n = W.shape[0]
    J = np.empty((n, n))
    for j in range(n):
        h = _FD_STEP * max(1.0, abs(W[j]))
        up = W.copy()
        up[j] += h
        down = W.copy()
        down[j] -= h
        J[:, j] = (residual_F(up, scenario, costs, pi) - residual_F(down, scenario, costs, pi)) / (2 * h)
    return J


def capm_weights(scenario: MarketScenario) -> np.ndarray:
    """Reverse-optimized CAPM market portfolio (delta Sigma)^-1 pi_c."""
    return _solve_spd(scenario.delta * scenario.sigma, scenario.pi_c, "sigma")


def _initial_guess(config: SolverConfig, scenario: MarketScenario) -> np.ndarray:
    if isinstance(config.initial_guess, str):
        if config.initial_guess == INITIAL_GUESS_CAPM:
            return capm_weights(scenario)
        if config.initial_guess == INITIAL_GUESS_ZEROS:
            return np.zeros(scenario.n)
        raise ValueError(f"unknown initial guess preset {config.initial_guess!r}")
    guess = np.asarray(config.initial_guess, dtype=float)
    if guess.shape != (scenario.n,):
        raise ValueError("initial guess has wrong length")
    return guess.copy()


def _newton_step(J, F):
    try:
        return np.linalg.solve(J, F)
    except np.linalg.LinAlgError:
        ridged = J + _JACOBIAN_RIDGE * np.eye(J.shape[0])
        try:
            return np.linalg.solve(ridged, F)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError("Newton step matrix is singular") from exc


def solve_given_pi(
    scenario: MarketScenario,
    costs: np.ndarray,
    pi: np.ndarray,
    config: SolverConfig = SolverConfig(),
) -> SolveOutcome:
    """Newton-Raphson root of F for the supplied excess-return vector."""
    costs = np.asarray(costs, dtype=float)
    pi = np.asarray(pi, dtype=float)
    W = _initial_guess(config, scenario)

    F = residual_F(W, scenario, costs, pi)
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        if np.max(np.abs(F)) <= config.residual_tolerance:
            iterations -= 1
            break
        if config.jacobian_mode == JACOBIAN_ANALYTIC:
            J = jacobian_F(W, scenario, costs)
        else:
            J = _finite_difference_jacobian(W, scenario, costs, pi)
        step = _newton_step(J, F)
        W = W - step
        F = residual_F(W, scenario, costs, pi)
        if np.max(np.abs(step)) <= config.step_tolerance:
            break

    residual_norm = float(np.max(np.abs(F)))
    return SolveOutcome(
        weights=W,
        iterations=iterations,
        residual_norm=residual_norm,
        converged=residual_norm <= config.residual_tolerance,
        delta_lambda=float(W @ costs) / scenario.sigma_m**2,
    )


def solve_self_consistent(
    scenario: MarketScenario,
    costs: np.ndarray,
    config: SolverConfig = SolverConfig(),
) -> SolveOutcome:
    """Closed-form fixed point of W = Sigma^-1 (pi_c - lambda) / (delta - W.lambda / sigma_m).

    Writing m = W.lambda, m solves m^2 - delta sigma_m m + sigma_m (u.lambda) = 0
    with u = Sigma^-1 (pi_c - lambda); the smaller root is taken (the larger
    one implies a negative residual risk appetite). Fails when the
    discriminant is negative, i.e. shadow-costs are too large for a real
    equilibrium.
    """
    costs = np.asarray(costs, dtype=float)
    u = _solve_spd(scenario.sigma, scenario.pi_c - costs, "sigma")
    sigma_m = scenario.sigma_m
    delta = scenario.delta

    disc = (delta * sigma_m) ** 2 - 4.0 * sigma_m * float(u @ costs)
    if disc < 0:
        raise NoRealEquilibriumError(
            "no real equilibrium: (delta sigma_m)^2 < 4 sigma_m (u.lambda)"
        )
    lambda_m = (delta * sigma_m - np.sqrt(disc)) / 2.0
    W = u / (delta - lambda_m / sigma_m)

    residual = (delta - (W @ costs) / sigma_m) * (scenario.sigma @ W) - (scenario.pi_c - costs)
    residual_norm = float(np.max(np.abs(residual)))
    return SolveOutcome(
        weights=W,
        iterations=0,
        residual_norm=residual_norm,
        converged=bool(np.isfinite(residual_norm)),
        delta_lambda=float(lambda_m) / sigma_m**2,
    )


def investor_optimal_portfolio(
    scenario: MarketScenario, costs: np.ndarray, delta_lambda: float
) -> np.ndarray:
    """Investor's unconstrained optimum under the modified risk aversion:

    w* = (delta + 2 delta_lambda)^-1 Sigma^-1 (pi_c + lambda).
    """
    coeff = scenario.delta + 2.0 * delta_lambda
    if coeff <= 0:
        raise ValueError("modified risk aversion delta + 2 delta_lambda must be positive")
    return _solve_spd(coeff * scenario.sigma, scenario.pi_c + np.asarray(costs), "sigma")


def reference_model_portfolio(
    pi: np.ndarray, sigma_gamma: np.ndarray, delta: float
) -> np.ndarray:
    """Mean-variance optimum against a reference covariance: (delta Sigma_g)^-1 pi."""
    return _solve_spd(delta * np.asarray(sigma_gamma, dtype=float), np.asarray(pi), "sigma_gamma")
