"""Optimal portfolios from a posterior distribution, with information-set
restriction and the three constrained variants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import FactorizationError, InfeasibleRiskError, InformationSet
from .views import PosteriorDistribution

OBJECTIVE_UNCONSTRAINED = "unconstrained"
OBJECTIVE_RISK = "risk_constrained"
OBJECTIVE_RISK_BUDGET = "risk_budget_constrained"
OBJECTIVE_MIN_VARIANCE = "min_variance"

OBJECTIVES = (
    OBJECTIVE_UNCONSTRAINED,
    OBJECTIVE_RISK,
    OBJECTIVE_RISK_BUDGET,
    OBJECTIVE_MIN_VARIANCE,
)


@dataclass(frozen=True)
class AllocationRequest:
    posterior: PosteriorDistribution
    objective: str
    delta: float
    info_set: Optional[InformationSet] = None
    sigma_cap: Optional[float] = None

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        needs_cap = self.objective in (OBJECTIVE_RISK, OBJECTIVE_RISK_BUDGET)
        if needs_cap and (self.sigma_cap is None or self.sigma_cap <= 0):
            raise ValueError(f"{self.objective} requires a positive sigma_cap")


@dataclass(frozen=True)
class AllocationOutcome:
    """Weights indexed by the (possibly restricted) asset subset, plus the
    two-fund coefficients when the risk-budget rule produced them."""

    weights: np.ndarray
    objective: str
    assets: tuple
    a: Optional[float] = None
    b: Optional[float] = None


def restrict_to_information_set(
    posterior: PosteriorDistribution, info_set: InformationSet
) -> PosteriorDistribution:
    """Marginal posterior on the assets the investor knows about."""
    idx = list(info_set.known_assets)
    if max(idx) >= posterior.n:
        raise ValueError("information set index outside posterior dimension")
    mean = posterior.mean[idx]
    cov = posterior.covariance[np.ix_(idx, idx)]
    return PosteriorDistribution(mean=mean, covariance=cov)


def _solve_cov(cov: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(np.asarray(cov, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("posterior covariance block is not positive definite") from exc
    return np.linalg.solve(L.T, np.linalg.solve(L, rhs))


def unconstrained_allocation(posterior: PosteriorDistribution, delta: float) -> np.ndarray:
    """w = (delta)^-1 [cov]^-1 mean."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return _solve_cov(posterior.covariance, posterior.mean) / delta


def risk_constrained_allocation(
    posterior: PosteriorDistribution, delta: float, sigma_cap: float
) -> np.ndarray:
    """Scale the unconstrained optimum onto the risk budget boundary."""
    if sigma_cap <= 0:
        raise ValueError("sigma_cap must be positive")
    w_u = unconstrained_allocation(posterior, delta)
    risk = float(np.sqrt(w_u @ posterior.covariance @ w_u))
    if risk == 0.0:
        raise ValueError("unconstrained direction is degenerate (zero risk)")
    return (sigma_cap / risk) * w_u


def min_variance_allocation(posterior: PosteriorDistribution) -> np.ndarray:
    """Budget-one portfolio with the smallest variance: [cov]^-1 1 normalized."""
    ones = np.ones(posterior.n)
    base = _solve_cov(posterior.covariance, ones)
    return base / float(ones @ base)


def min_variance_risk(posterior: PosteriorDistribution) -> float:
    w = min_variance_allocation(posterior)
    return float(np.sqrt(w @ posterior.covariance @ w))


def risk_budget_allocation(
    posterior: PosteriorDistribution, sigma_cap: float, delta: float = 1.0
) -> AllocationOutcome:
    """Two-fund rule: w = a w_u + b w_mv with full budget and risk at the cap.

    b = 1 - a * sum(w_u) enforces the budget (w_mv sums to one). Along that
    line the variance is sigma_mv^2 + a^2 d.cov.d with d = w_u - sum(w_u)
    w_mv, because cov w_mv is proportional to the ones vector. The root of
    the variance equation is signed to increase expected return; caps below
    the minimum-variance risk are infeasible and reported, never clamped.
    """
    if sigma_cap <= 0:
        raise ValueError("sigma_cap must be positive")
    cov = posterior.covariance
    w_u = unconstrained_allocation(posterior, delta)
    w_mv = min_variance_allocation(posterior)
    var_mv = float(w_mv @ cov @ w_mv)
    if sigma_cap**2 < var_mv * (1.0 - 1e-12):
        raise InfeasibleRiskError(sigma_cap, float(np.sqrt(var_mv)))

    d = w_u - float(np.sum(w_u)) * w_mv
    dd = float(d @ cov @ d)
    if dd <= 0.0:
        a = 0.0
    else:
        a = float(np.sqrt(max(sigma_cap**2 - var_mv, 0.0) / dd))
        if float(d @ posterior.mean) < 0:
            a = -a
    b = 1.0 - a * float(np.sum(w_u))
    weights = a * w_u + b * w_mv
    return AllocationOutcome(
        weights=weights,
        objective=OBJECTIVE_RISK_BUDGET,
        assets=tuple(range(posterior.n)),
        a=a,
        b=b,
    )


def run_allocation(request: AllocationRequest) -> AllocationOutcome:
    """Dispatch an AllocationRequest, restricting to the information set first."""
    post = request.posterior
    assets = tuple(range(post.n))
    if request.info_set is not None:
        post = restrict_to_information_set(post, request.info_set)
        assets = request.info_set.known_assets

    if request.objective == OBJECTIVE_UNCONSTRAINED:
        w = unconstrained_allocation(post, request.delta)
        return AllocationOutcome(weights=w, objective=request.objective, assets=assets)
    if request.objective == OBJECTIVE_RISK:
        w = risk_constrained_allocation(post, request.delta, request.sigma_cap)
        return AllocationOutcome(weights=w, objective=request.objective, assets=assets)
    if request.objective == OBJECTIVE_MIN_VARIANCE:
        w = min_variance_allocation(post)
        return AllocationOutcome(weights=w, objective=request.objective, assets=assets)
    outcome = risk_budget_allocation(post, request.sigma_cap, request.delta)
    return AllocationOutcome(
        weights=outcome.weights,
        objective=request.objective,
        assets=assets,
        a=outcome.a,
        b=outcome.b,
    )
