"""Core data types and validation for shadow-cost market scenarios.

All types are immutable after construction (arrays are frozen) and safe to
share across threads. Numeric invariants beyond basic shape checks are
reported by :func:`validate_scenario` rather than raised, so callers can
collect every problem in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

# Relative eigenvalue slack under which a symmetric matrix still counts as
# positive semidefinite (cross-covariance blocks are rarely exactly PSD).
PSD_RTOL = 1e-10

SYMMETRY_ATOL = 1e-12
ROW_SUM_ATOL = 1e-9

VIEW_ABSOLUTE = "absolute"
VIEW_RELATIVE = "relative"


class ShadowCapError(Exception):
    """Base class for all package errors."""


class DegenerateMarketError(ShadowCapError):
    """Market volatility is zero; beta and risk aversion are undefined."""


class FactorizationError(ShadowCapError):
    """A matrix that must be positive definite failed to factor."""


class NoRealEquilibriumError(ShadowCapError):
    """The self-consistent quadratic has no real root (shadow-costs too large)."""


class ConfidenceError(ShadowCapError):
    """View confidence outside the open interval (0, 1)."""


class InfeasibleRiskError(ShadowCapError):
    """Risk cap below the minimum-variance risk of the posterior."""

    def __init__(self, sigma_cap: float, min_variance_risk: float):
        self.sigma_cap = float(sigma_cap)
        self.min_variance_risk = float(min_variance_risk)
        super().__init__(
            f"risk cap {sigma_cap:.6g} is below the minimum attainable "
            f"risk {min_variance_risk:.6g}"
        )


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def _as_vector(a, n: int, name: str) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {out.shape}")
    return _freeze(out)


def _as_matrix(a, shape: tuple, name: str) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {out.shape}")
    return _freeze(out)


def is_psd(matrix: np.ndarray, rtol: float = PSD_RTOL) -> bool:
    """PSD test with relative slack: min eigenvalue >= -rtol * max eigenvalue."""
    eigs = np.linalg.eigvalsh(np.asarray(matrix, dtype=float))
    return eigs[0] >= -rtol * max(eigs[-1], 0.0)


def is_positive_definite(matrix: np.ndarray) -> bool:
    """Strict PD test: all Cholesky pivots exist and are positive."""
    try:
        np.linalg.cholesky(np.asarray(matrix, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class MarketScenario:
    """Published market inputs: covariance, CAPM excess returns, rates.

    ``delta``, the market price of risk (E[R_M] - r_f) / sigma_m^2, is derived
    once at construction and never read from input files.
    """

    asset_labels: tuple
    sigma: np.ndarray
    pi_c: np.ndarray
    r_f: float
    expected_market_return: float
    sigma_m: float
    delta: float = field(init=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.asset_labels)
        n = len(labels)
        if n < 1:
            raise ValueError("scenario needs at least one asset")
        object.__setattr__(self, "asset_labels", labels)
        object.__setattr__(self, "sigma", _as_matrix(self.sigma, (n, n), "sigma"))
        object.__setattr__(self, "pi_c", _as_vector(self.pi_c, n, "pi_c"))
        if self.sigma_m <= 0:
            raise DegenerateMarketError(f"sigma_m must be positive, got {self.sigma_m}")
        delta = (self.expected_market_return - self.r_f) / self.sigma_m**2
        if not np.isfinite(delta):
            raise ValueError("derived market price of risk is not finite")
        object.__setattr__(self, "delta", float(delta))

    @property
    def n(self) -> int:
        return len(self.asset_labels)


@dataclass(frozen=True)
class RandomMeanSpec:
    """Optional random-mean layer for the shadow-cost vector."""

    costs: np.ndarray
    tau: float

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        if costs.ndim != 1:
            raise ValueError("random-mean costs must be a vector")
        object.__setattr__(self, "costs", _freeze(costs))
        if self.tau <= 0:
            raise ValueError(f"random-mean tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class ShadowCostSpec:
    """Shadow-cost inputs: mean costs, their covariance, and the cross block.

    ``cross_cov`` rows index returns, columns index shadow-costs; it is a
    cross-covariance and need not be symmetric.
    """

    costs: np.ndarray
    cost_cov: np.ndarray
    cross_cov: np.ndarray
    tau: float
    random_mean: Optional[RandomMeanSpec] = None

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        if costs.ndim != 1:
            raise ValueError("costs must be a vector")
        n = costs.shape[0]
        object.__setattr__(self, "costs", _freeze(costs))
        object.__setattr__(self, "cost_cov", _as_matrix(self.cost_cov, (n, n), "cost_cov"))
        object.__setattr__(self, "cross_cov", _as_matrix(self.cross_cov, (n, n), "cross_cov"))
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.random_mean is not None and self.random_mean.costs.shape != (n,):
            raise ValueError("random-mean costs length does not match costs")

    @property
    def n(self) -> int:
        return self.costs.shape[0]


@dataclass(frozen=True)
class ViewSet:
    """Pick-matrix views. Exactly one of ``confidence`` or ``omega`` is set.

    Row kinds: absolute rows sum to 1, relative rows sum to 0. View columns
    bind to assets by position in the scenario's asset order.
    """

    P: np.ndarray
    q: np.ndarray
    kinds: tuple
    confidence: Optional[float] = None
    omega: Optional[np.ndarray] = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2:
            raise ValueError("P must be a v x n matrix")
        v = P.shape[0]
        object.__setattr__(self, "P", _freeze(P))
        object.__setattr__(self, "q", _as_vector(self.q, v, "q"))
        kinds = tuple(self.kinds)
        if len(kinds) != v:
            raise ValueError(f"kinds must have one tag per view, got {len(kinds)} for {v}")
        for k in kinds:
            if k not in (VIEW_ABSOLUTE, VIEW_RELATIVE):
                raise ValueError(f"unknown view kind {k!r}")
        object.__setattr__(self, "kinds", kinds)
        if (self.confidence is None) == (self.omega is None):
            raise ValueError("exactly one of confidence or omega must be given")
        if self.omega is not None:
            object.__setattr__(self, "omega", _as_matrix(self.omega, (v, v), "omega"))

    @property
    def v(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class InformationSet:
    """Subset of assets an investor knows about. Indices are zero-based."""

    investor_id: str
    known_assets: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.known_assets)
        if not idx:
            raise ValueError("information set must be nonempty")
        if len(set(idx)) != len(idx):
            raise ValueError("information set indices must be unique")
        if any(i < 0 for i in idx):
            raise ValueError("information set indices must be non-negative")
        object.__setattr__(self, "known_assets", idx)

    @property
    def size(self) -> int:
        return len(self.known_assets)


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    residual_norm: float
    delta_lambda: float


@dataclass(frozen=True)
class EquilibriumResult:
    """One equilibrium row: excess returns, covariance, weights, metrics."""

    mean: np.ndarray
    covariance: np.ndarray
    weights: np.ndarray
    portfolio_return: float
    portfolio_risk: float
    diagnostics: Optional[SolveDiagnostics] = None

    def __post_init__(self):
        object.__setattr__(self, "mean", _freeze(self.mean))
        object.__setattr__(self, "covariance", _freeze(self.covariance))
        object.__setattr__(self, "weights", _freeze(self.weights))
        if self.portfolio_risk < 0:
            raise ValueError("portfolio risk cannot be negative")


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" or "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple

    @property
    def errors(self) -> tuple:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_scenario(
    scenario: MarketScenario,
    shadow: ShadowCostSpec,
    views: Optional[ViewSet] = None,
    info_set: Optional[InformationSet] = None,
) -> ValidationReport:
    """Check every numeric invariant; returns a report instead of raising.

    The joint block [[tau*Sigma, C], [C', Lambda]] is reported as a warning
    when it is not PSD: published cross-covariances routinely violate it and
    nothing downstream requires it.
    """
    issues = []

    def err(path, msg):
        issues.append(Issue("error", path, msg))

    def warn(path, msg):
        issues.append(Issue("warning", path, msg))

    n = scenario.n
    sigma = scenario.sigma
    asym = np.max(np.abs(sigma - sigma.T)) if n else 0.0
    if asym > SYMMETRY_ATOL:
        err("market.sigma", f"not symmetric (max asymmetry {asym:.3e})")
    elif not is_positive_definite(sigma):
        err("market.sigma", "not positive definite")
    if not np.isfinite(scenario.delta):
        err("market", "derived risk aversion is not finite")

    if shadow.n != n:
        err("shadow_costs", f"dimension {shadow.n} does not match {n} assets")
        return ValidationReport(tuple(issues))

    if np.any(shadow.costs < 0):
        bad = int(np.argmin(shadow.costs))
        err("shadow_costs.costs", f"entry {bad + 1} is negative ({shadow.costs[bad]:.6g})")
    lam_asym = np.max(np.abs(shadow.cost_cov - shadow.cost_cov.T))
    if lam_asym > SYMMETRY_ATOL:
        err("shadow_costs.cost_cov", f"not symmetric (max asymmetry {lam_asym:.3e})")
    elif not is_psd(shadow.cost_cov):
        err("shadow_costs.cost_cov", "not positive semidefinite")

    blocks_ok = not issues

    if views is not None:
        _validate_views(views, scenario, info_set, err, warn)

    if blocks_ok:
        joint = np.block([
            [shadow.tau * sigma, shadow.cross_cov],
            [shadow.cross_cov.T, shadow.cost_cov],
        ])
        if not is_psd(joint):
            warn(
                "shadow_costs",
                "joint block of tau*sigma, cross_cov and cost_cov is not PSD; "
                "the conditional-expectation reference model may exceed total variance",
            )

    return ValidationReport(tuple(issues))


def _validate_views(views, scenario, info_set, err, warn):
    n = scenario.n
    if views.P.shape[1] != n:
        err("views.P", f"has {views.P.shape[1]} columns for {n} assets")
        return
    if np.max(np.abs(views.P)) > 1.0 + 1e-12:
        err("views.P", "entries must lie in [-1, 1]")
    for i, kind in enumerate(views.kinds):
        target = 1.0 if kind == VIEW_ABSOLUTE else 0.0
        row_sum = float(views.P[i].sum())
        if abs(row_sum - target) > ROW_SUM_ATOL:
            err(
                f"views.P[{i + 1}]",
                f"{kind} row sums to {row_sum:.10g}, expected {target:g}",
            )
    if views.confidence is not None and not (0.0 < views.confidence < 1.0):
        err("views.confidence", f"must be in (0, 1), got {views.confidence}")
    if views.omega is not None:
        om_asym = np.max(np.abs(views.omega - views.omega.T))
        if om_asym > SYMMETRY_ATOL:
            err("views.omega", f"not symmetric (max asymmetry {om_asym:.3e})")
        elif not is_positive_definite(views.omega):
            err("views.omega", "not positive definite")
    if info_set is not None:
        if any(i >= n for i in info_set.known_assets):
            err("info_set", "contains an index outside the asset range")
        else:
            outside = sorted(set(range(n)) - set(info_set.known_assets))
            for j in outside:
                if np.any(views.P[:, j] != 0.0):
                    err(
                        "views.P",
                        f"column {j + 1} must be zero: asset outside the information set",
                    )
