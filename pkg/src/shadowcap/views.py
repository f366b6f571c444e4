"""View machinery and the Gaussian posterior blend of prior and views."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import ConfidenceError, FactorizationError, MarketScenario, ViewSet, _freeze
from .reference import ReferenceModel

STANCE_ETA = {
    "very_bearish": -2.0,
    "bearish": -1.0,
    "bullish": 1.0,
    "very_bullish": 2.0,
}


@dataclass(frozen=True)
class PosteriorDistribution:
    """Gaussian posterior of the equilibrium excess returns.

    When built directly from a prior and views, the precision split is kept:
    covariance^-1 = precision_prior + precision_views. Restriction to an
    information subset marginalizes the Gaussian, which does not preserve
    that split, so restricted posteriors carry None for both parts.
    """

    mean: np.ndarray
    covariance: np.ndarray
    precision_prior: Optional[np.ndarray] = None
    precision_views: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "mean", _freeze(self.mean))
        object.__setattr__(self, "covariance", _freeze(self.covariance))
        if self.precision_prior is not None:
            object.__setattr__(self, "precision_prior", _freeze(self.precision_prior))
        if self.precision_views is not None:
            object.__setattr__(self, "precision_views", _freeze(self.precision_views))

    @property
    def n(self) -> int:
        return self.mean.shape[0]


def omega_from_confidence(c: float, P: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """View uncertainty from a single confidence scalar: (1/c - 1) P Sigma P'.

    c = 1/2 weighs the expert like the prior; the limits c -> 0 (infinite
    uncertainty) and c -> 1 (dogmatic views) are rejected rather than
    approximated.
    """
    if not 0.0 < c < 1.0:
        raise ConfidenceError(f"confidence must be strictly inside (0, 1), got {c}")
    P = np.asarray(P, dtype=float)
    out = (1.0 / c - 1.0) * (P @ np.asarray(sigma, dtype=float) @ P.T)
    return (out + out.T) / 2.0


def resolve_omega(views: ViewSet, sigma: np.ndarray) -> np.ndarray:
    """Explicit omega if the view set carries one, else derived from confidence."""
    if views.omega is not None:
        return np.asarray(views.omega, dtype=float)
    return omega_from_confidence(views.confidence, views.P, sigma)


def quantify_qualitative_views(
    P: np.ndarray, pi: np.ndarray, sigma: np.ndarray, stances
) -> np.ndarray:
    """Turn qualitative stances into a pick-vector.

    q_k = (P pi)_k + eta_k sqrt((P Sigma P')_kk) with eta in
    {-2, -1, +1, +2} for very bearish through very bullish. The equilibrium
    vector pi is the incomplete-information one, not the CAPM prior.
    """
    P = np.asarray(P, dtype=float)
    if len(stances) != P.shape[0]:
        raise ValueError("one stance per view row required")
    try:
        eta = np.array([STANCE_ETA[s] for s in stances], dtype=float)
    except KeyError as exc:
        raise ValueError(f"unknown stance {exc.args[0]!r}") from None
    view_var = np.diag(P @ np.asarray(sigma, dtype=float) @ P.T)
    return P @ np.asarray(pi, dtype=float) + eta * np.sqrt(view_var)


def _precision(matrix: np.ndarray, what: str) -> np.ndarray:
    try:
        L = np.linalg.cholesky(np.asarray(matrix, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"{what} is not positive definite") from exc
    inv_l = np.linalg.solve(L, np.eye(L.shape[0]))
    out = inv_l.T @ inv_l
    return (out + out.T) / 2.0


def posterior(
    reference: ReferenceModel,
    views: ViewSet,
    market_sigma: Optional[np.ndarray] = None,
) -> PosteriorDistribution:
    """Blend the reference prior with the views through the precision sum.

    covariance = [Sg^-1 + P' Om^-1 P]^-1 and
    mean = covariance [Sg^-1 pi + P' Om^-1 q], evaluated through one
    symmetric factorization of the summed precision. ``market_sigma`` is
    required only when the view set carries a confidence scalar instead of
    an explicit omega.
    """
    if views.omega is None and market_sigma is None:
        raise ValueError("market_sigma needed to derive omega from confidence")
    omega = resolve_omega(views, market_sigma)

    P = views.P
    if np.linalg.matrix_rank(P) < views.v:
        warnings.warn("pick-matrix is row-rank deficient; views overlap", stacklevel=2)

    prec_prior = _precision(reference.covariance, "reference covariance")
    omega_inv = _precision(omega, "view uncertainty")
    prec_views = P.T @ omega_inv @ P
    prec_views = (prec_views + prec_views.T) / 2.0

    summed = prec_prior + prec_views
    try:
        L = np.linalg.cholesky(summed)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("summed precision is not positive definite") from exc

    def chol_solve(rhs):
        return np.linalg.solve(L.T, np.linalg.solve(L, rhs))

    rhs = prec_prior @ reference.mean + P.T @ (omega_inv @ views.q)
    mean = chol_solve(rhs)
    cov = chol_solve(np.eye(reference.n))
    cov = (cov + cov.T) / 2.0
    return PosteriorDistribution(
        mean=mean,
        covariance=cov,
        precision_prior=prec_prior,
        precision_views=prec_views,
    )


def bl_posterior(scenario: MarketScenario, tau: float, views: ViewSet) -> PosteriorDistribution:
    """Complete-information special case: prior N(pi_c, tau Sigma)."""
    reference = ReferenceModel(
        gamma=1, mean=scenario.pi_c, covariance=tau * scenario.sigma
    )
    return posterior(reference, views, market_sigma=scenario.sigma)


def posterior_predictive_views(
    reference: ReferenceModel,
    views: ViewSet,
    market_sigma: Optional[np.ndarray] = None,
) -> tuple:
    """Marginal law of the view outcomes: mean P pi, covariance P Sg P' + Om."""
    if views.omega is None and market_sigma is None:
        raise ValueError("market_sigma needed to derive omega from confidence")
    omega = resolve_omega(views, market_sigma)
    P = views.P
    mean = P @ reference.mean
    cov = P @ reference.covariance @ P.T + omega
    return mean, (cov + cov.T) / 2.0


def view_fit(posterior_dist: PosteriorDistribution, views: ViewSet) -> float:
    """Euclidean gap between what the views asked for and what the posterior gives."""
    return float(np.linalg.norm(views.P @ posterior_dist.mean - views.q))
