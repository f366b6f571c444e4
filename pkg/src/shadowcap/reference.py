"""Reference (prior) distributions for the equilibrium excess returns.

gamma = 1 keeps the scaled market covariance tau * Sigma; gamma = 0 uses the
variance explained by the shadow-costs, C Lambda^-1 C'. Intermediate blends
are rejected: the model is defined only at the two endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import FactorizationError, MarketScenario, ShadowCostSpec, _freeze

# Pivots at or below this are clamped to zero when factoring semidefinite
# covariances; more negative values mean the matrix is indefinite.
ZERO_PIVOT_CLAMP = 1e-12


@dataclass(frozen=True)
class ReferenceModel:
    """Gaussian prior N(mean, covariance) for the equilibrium excess returns."""

    gamma: int
    mean: np.ndarray
    covariance: np.ndarray
    rank_deficient: bool = field(init=False)

    def __post_init__(self):
        if self.gamma not in (0, 1):
            raise ValueError(f"gamma must be 0 or 1, got {self.gamma}")
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValueError("covariance shape does not match mean")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "covariance", _freeze(cov))
        eigs = np.linalg.eigvalsh(cov)
        object.__setattr__(
            self, "rank_deficient", bool(eigs[0] <= ZERO_PIVOT_CLAMP * max(eigs[-1], 1e-300))
        )

    @property
    def n(self) -> int:
        return self.mean.shape[0]


def sigma_gamma(
    gamma: int,
    tau: float,
    sigma: np.ndarray,
    cross_cov: np.ndarray,
    cost_cov: np.ndarray,
) -> np.ndarray:
    """Reference covariance gamma * tau * Sigma + (1 - gamma) * C Lambda^-1 C'.

    The result is symmetrized to kill factorization roundoff; the gamma = 0
    branch is a Gram form and PSD whenever Lambda is PD.
    """
    if gamma not in (0, 1):
        raise ValueError(f"gamma must be 0 or 1, got {gamma}")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    sigma = np.asarray(sigma, dtype=float)
    if gamma == 1:
        out = tau * sigma
    else:
        out = explained_variance(cross_cov, cost_cov)
    return (out + out.T) / 2.0


def explained_variance(cross_cov: np.ndarray, cost_cov: np.ndarray) -> np.ndarray:
    """Variance of the conditional expectation: C Lambda^-1 C'."""
    cross = np.asarray(cross_cov, dtype=float)
    try:
        solved = np.linalg.solve(np.asarray(cost_cov, dtype=float), cross.T)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("shadow-cost covariance is singular") from exc
    return cross @ solved


def total_variance_decomposition(
    tau: float, sigma: np.ndarray, cross_cov: np.ndarray, cost_cov: np.ndarray
) -> tuple:
    """Split tau * Sigma into (explained, unexplained) by the shadow-costs.

    The unexplained part can be indefinite for published inputs; callers
    decide whether that matters (see ReferenceModel.rank_deficient).
    """
    explained = explained_variance(cross_cov, cost_cov)
    unexplained = tau * np.asarray(sigma, dtype=float) - explained
    return explained, unexplained


def deterministic_model(
    scenario: MarketScenario,
    shadow: ShadowCostSpec,
    gamma: int,
    mean: np.ndarray,
    tau: float = None,
) -> ReferenceModel:
    """Reference model with the given mean and the scenario's Sigma_gamma."""
    tau = shadow.tau if tau is None else tau
    cov = sigma_gamma(gamma, tau, scenario.sigma, shadow.cross_cov, shadow.cost_cov)
    return ReferenceModel(gamma=gamma, mean=np.asarray(mean, dtype=float), covariance=cov)


def random_mean_adjusted_model(
    scenario: MarketScenario,
    shadow: ShadowCostSpec,
    weights: np.ndarray,
    gamma: int,
    tau: float = None,
) -> ReferenceModel:
    """Reference model when the shadow-cost mean is itself random.

    The mean becomes (delta - lambda_M / sigma_m^2) Sigma w + lambda_1 with
    lambda_M = w . lambda_1, and the covariance swaps Lambda for tau_1 Lambda.
    """
    if shadow.random_mean is None:
        raise ValueError("shadow spec has no random-mean layer")
    tau = shadow.tau if tau is None else tau
    w = np.asarray(weights, dtype=float)
    lam1 = shadow.random_mean.costs
    lambda_m = float(w @ lam1)
    mean = (scenario.delta - lambda_m / scenario.sigma_m**2) * (scenario.sigma @ w) + lam1
    cov = sigma_gamma(
        gamma, tau, scenario.sigma, shadow.cross_cov, shadow.random_mean.tau * shadow.cost_cov
    )
    return ReferenceModel(gamma=gamma, mean=mean, covariance=cov)


def gaussian_log_density(x: np.ndarray, mean: np.ndarray, covariance: np.ndarray) -> float:
    """Log density of N(mean, covariance) at x; covariance must be PD."""
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("covariance is not positive definite") from exc
    z = np.linalg.solve(L, x - mean)
    n = mean.shape[0]
    log_det = 2.0 * float(np.sum(np.log(np.diag(L))))
    return float(-0.5 * (n * np.log(2.0 * np.pi) + log_det + z @ z))


def psd_factor(covariance: np.ndarray, clamp: float = ZERO_PIVOT_CLAMP) -> np.ndarray:
    """Factor F with F F' = covariance, tolerating semidefiniteness.

    Plain Cholesky when it succeeds; otherwise a diagonally pivoted variant
    that clamps pivots in [-clamp, clamp] to zero and rejects anything more
    negative as indefinite.
    """
    cov = np.array(covariance, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass

    n = cov.shape[0]
    scale = max(float(np.max(np.abs(np.diag(cov)))), 1.0)
    tol = clamp * scale
    L = np.zeros((n, n))
    perm = list(range(n))
    a = cov.copy()
    stop = n
    for k in range(n):
        rest = np.diag(a)[k:]
        p = k + int(np.argmax(rest))
        if p != k:
            a[[k, p], :] = a[[p, k], :]
            a[:, [k, p]] = a[:, [p, k]]
            L[[k, p], :k] = L[[p, k], :k]
            perm[k], perm[p] = perm[p], perm[k]
        pivot = a[k, k]
        if pivot <= tol:
            stop = k
            break
        L[k, k] = np.sqrt(pivot)
        L[k + 1:, k] = a[k + 1:, k] / L[k, k]
        a[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
    if stop < n and float(np.min(np.diag(a)[stop:])) < -tol:
        raise FactorizationError("covariance is indefinite")

    out = np.zeros((n, n))
    out[perm, :] = L
    return out


def sample_posterior(
    mean: np.ndarray, covariance: np.ndarray, count: int, seed: int
) -> np.ndarray:
    """Exact Gaussian sampler: mean + F z with F a PSD factor of the covariance.

    Deterministic under a fixed seed. The posterior is exactly Gaussian, so
    no chain-based sampling is needed.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    mean = np.asarray(mean, dtype=float)
    factor = psd_factor(covariance)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, mean.shape[0]))
    return mean + z @ factor.T
