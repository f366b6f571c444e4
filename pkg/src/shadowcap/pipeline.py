"""Scenario pipeline: reproduces the published tables and figure series.

The computation order mirrors the published five-asset study:

1. CAPM weights from the prior excess returns.
2. Self-consistent incomplete-information portfolio, its lambda_M and
   delta_lambda, systematic risk, extra excess returns and implied pi.
3. Sensitivity gradients of the extra excess returns.
4. Reference models per gamma and the reverse-optimized model portfolios.
5. Posterior blends with the views (the prior covariance entering the view
   update is tau * Sigma_gamma, matching the published convention of
   reusing the complete-information formula with Sigma swapped for
   Sigma_gamma) and the unconstrained allocations.

Model-portfolio metrics (tables keyed 6 and 7) are excess-only returns with
risk measured against the model covariance; the market-portfolio metrics of
table 4 add the risk-free leg and use the raw covariance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import equilibrium as eq
from . import solver
from .domain import MarketScenario, ShadowCostSpec, ViewSet
from .reference import ReferenceModel, sigma_gamma
from .scenario import ScenarioFile
from .views import PosteriorDistribution, posterior, resolve_omega, view_fit

MODEL_BL = "bl"
MODEL_GAMMA0 = "gamma0"
MODEL_GAMMA1 = "gamma1"

DEFAULT_CONFIDENCE = 0.5


@dataclass(frozen=True)
class PipelineOptions:
    tau: Optional[float] = None  # default: the scenario's shadow tau
    c: Optional[float] = None  # default: the scenario's view confidence
    gammas: tuple = (0, 1)
    seed: int = 0


@dataclass(frozen=True)
class ModelRow:
    name: str
    mean: np.ndarray
    weights: np.ndarray
    covariance: np.ndarray
    portfolio_return: float
    portfolio_risk: float
    fit: Optional[float] = None


@dataclass(frozen=True)
class EquilibriumCore:
    """Stage-one quantities shared by reports and the what-if service."""

    w_capm: np.ndarray
    w_incomplete: np.ndarray
    lambda_m: float
    delta_lambda: float
    beta: np.ndarray
    extra: np.ndarray
    pi: np.ndarray


def compute_equilibrium_core(scenario: MarketScenario, shadow: ShadowCostSpec) -> EquilibriumCore:
    w_capm = solver.capm_weights(scenario)
    outcome = solver.solve_self_consistent(scenario, shadow.costs)
    W = outcome.weights
    lambda_m = float(W @ shadow.costs)
    beta = eq.beta_vector(scenario.sigma, W, scenario.sigma_m)
    extra = eq.extra_excess_returns(shadow.costs, lambda_m, beta)
    return EquilibriumCore(
        w_capm=w_capm,
        w_incomplete=W,
        lambda_m=lambda_m,
        delta_lambda=outcome.delta_lambda,
        beta=beta,
        extra=extra,
        pi=scenario.pi_c + extra,
    )


@dataclass(frozen=True)
class ReportBundle:
    asset_labels: tuple
    tau: float
    c: Optional[float]
    shadow_costs: np.ndarray
    delta: float
    lambda_m: float
    delta_lambda: float
    pi_c: np.ndarray
    extra: np.ndarray
    pi: np.ndarray
    beta: np.ndarray
    w_capm: np.ndarray
    w_incomplete: np.ndarray
    w_investor: np.ndarray
    metrics_capm: tuple
    metrics_incomplete: tuple
    metrics_investor: tuple
    sensitivity: eq.SensitivityReport
    reference_rows: dict  # gamma -> ModelRow (table 6)
    posterior_rows: dict  # model name -> ModelRow (table 7)
    tau_sweep: dict  # tau -> {gamma -> ModelRow}
    c_sweep: dict  # c -> {model -> ModelRow}
    sigma_gamma_sweep: dict  # (gamma, tau) -> matrix

    @property
    def tables(self) -> dict:
        """Published-table view of the bundle, keyed by table number."""
        out = {
            4: {
                "pi_c": self.pi_c,
                "extra": self.extra,
                "pi": self.pi,
                "w_capm": self.w_capm,
                "w_incomplete": self.w_incomplete,
                "w_investor": self.w_investor,
                "metrics": {
                    "capm": self.metrics_capm,
                    "incomplete": self.metrics_incomplete,
                    "investor": self.metrics_investor,
                },
            },
            5: {
                "delta": self.delta,
                "lambda_m": self.lambda_m,
                "delta_lambda": self.delta_lambda,
            },
            6: {
                "pi": self.pi,
                "rows": self.reference_rows,
            },
        }
        if self.posterior_rows:
            out[7] = {"rows": self.posterior_rows}
        return out


def _posterior_row(
    name: str,
    scenario: MarketScenario,
    prior_mean: np.ndarray,
    model_cov: np.ndarray,
    gamma: int,
    tau: float,
    views: ViewSet,
) -> ModelRow:
    prior = ReferenceModel(gamma=gamma, mean=prior_mean, covariance=tau * model_cov)
    post = posterior(prior, views, market_sigma=scenario.sigma)
    w = solver.reference_model_portfolio(post.mean, post.covariance, scenario.delta)
    ret, risk = eq.portfolio_metrics(w, post.mean, post.covariance, r_f=0.0)
    return ModelRow(
        name=name,
        mean=post.mean,
        weights=w,
        covariance=post.covariance,
        portfolio_return=ret,
        portfolio_risk=risk,
        fit=view_fit(post, views),
    )


def _reference_row(
    gamma: int, scenario: MarketScenario, shadow: ShadowCostSpec, pi: np.ndarray, tau: float
) -> ModelRow:
    cov = sigma_gamma(gamma, tau, scenario.sigma, shadow.cross_cov, shadow.cost_cov)
    w = solver.reference_model_portfolio(pi, cov, scenario.delta)
    ret, risk = eq.portfolio_metrics(w, pi, cov, r_f=0.0)
    return ModelRow(
        name=f"gamma{gamma}",
        mean=pi,
        weights=w,
        covariance=cov,
        portfolio_return=ret,
        portfolio_risk=risk,
    )


def run_pipeline(sf: ScenarioFile, options: PipelineOptions = PipelineOptions()) -> ReportBundle:
    scenario = sf.market
    shadow = sf.shadow
    tau = options.tau if options.tau is not None else shadow.tau
    if sf.views is not None and sf.views.confidence is not None:
        default_c = sf.views.confidence
    else:
        default_c = DEFAULT_CONFIDENCE
    c = options.c if options.c is not None else default_c

    core = compute_equilibrium_core(scenario, shadow)
    W = core.w_incomplete
    pi = core.pi
    delta_lambda = core.delta_lambda
    w_investor = solver.investor_optimal_portfolio(scenario, shadow.costs, delta_lambda)

    sensitivity = eq.classify_sensitivity_regimes(
        shadow.costs, core.beta, W, delta_lambda, np.diag(scenario.sigma)
    )

    reference_rows = {
        g: _reference_row(g, scenario, shadow, pi, tau) for g in options.gammas
    }

    posterior_rows = {}
    c_sweep = {}
    if sf.views is not None:
        views = _with_confidence(sf.views, c)
        posterior_rows = _posterior_block(scenario, shadow, pi, tau, views, options.gammas)
        c_values = tuple(sf.sweeps.c)
        if c_values:
            with ThreadPoolExecutor(max_workers=len(c_values)) as pool:
                futures = {
                    cv: pool.submit(
                        _posterior_block,
                        scenario, shadow, pi, tau,
                        _with_confidence(sf.views, cv), options.gammas,
                    )
                    for cv in c_values
                }
            c_sweep = {cv: futures[cv].result() for cv in c_values}

    tau_sweep = {}
    sigma_gamma_sweep = {}
    for tv in sf.sweeps.tau:
        tau_sweep[tv] = {
            g: _reference_row(g, scenario, shadow, pi, tv) for g in options.gammas
        }
    sweep_gammas = sf.sweeps.gamma or options.gammas
    for g in sweep_gammas:
        for tv in sf.sweeps.tau:
            sigma_gamma_sweep[(g, tv)] = sigma_gamma(
                g, tv, scenario.sigma, shadow.cross_cov, shadow.cost_cov
            )

    return ReportBundle(
        asset_labels=scenario.asset_labels,
        tau=tau,
        c=c if sf.views is not None else None,
        shadow_costs=shadow.costs,
        delta=scenario.delta,
        lambda_m=core.lambda_m,
        delta_lambda=delta_lambda,
        pi_c=scenario.pi_c,
        extra=core.extra,
        pi=pi,
        beta=core.beta,
        w_capm=core.w_capm,
        w_incomplete=W,
        w_investor=w_investor,
        metrics_capm=eq.portfolio_metrics(core.w_capm, scenario.pi_c, scenario.sigma, scenario.r_f),
        metrics_incomplete=eq.portfolio_metrics(W, pi, scenario.sigma, scenario.r_f),
        metrics_investor=eq.portfolio_metrics(w_investor, pi, scenario.sigma, scenario.r_f),
        sensitivity=sensitivity,
        reference_rows=reference_rows,
        posterior_rows=posterior_rows,
        tau_sweep=tau_sweep,
        c_sweep=c_sweep,
        sigma_gamma_sweep=sigma_gamma_sweep,
    )


def _with_confidence(views: ViewSet, c: float) -> ViewSet:
    if views.omega is not None:
        return views
    return ViewSet(P=views.P, q=views.q, kinds=views.kinds, confidence=c)


def _posterior_block(scenario, shadow, pi, tau, views, gammas) -> dict:
    rows = {
        MODEL_BL: _posterior_row(
            MODEL_BL, scenario, scenario.pi_c, scenario.sigma, 1, tau, views
        )
    }
    for g in gammas:
        cov = sigma_gamma(g, tau, scenario.sigma, shadow.cross_cov, shadow.cost_cov)
        rows[f"gamma{g}"] = _posterior_row(
            f"gamma{g}", scenario, pi, cov, g, tau, views
        )
    return rows


# ---------------------------------------------------------------------------
# figure exports

FIGURE_IDS = (1, 2, 3, 4, 5, 6, 7)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def _rows_to_text(header, rows) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


def export_figure_data(bundle: ReportBundle, figure_id: int) -> str:
    """Deterministic TSV series for one figure; unknown ids raise ValueError."""
    labels = bundle.asset_labels
    if figure_id == 1:
        # shadow-costs (left panel) and implied excess returns (right panel)
        rows = [
            (labels[k], bundle.shadow_costs[k], bundle.pi[k])
            for k in range(len(labels))
        ]
        return _rows_to_text(("asset", "shadow_cost", "implied_excess_return"), rows)
    if figure_id == 2:
        rows = [
            (labels[k], bundle.w_capm[k], bundle.w_incomplete[k], bundle.w_investor[k])
            for k in range(len(labels))
        ]
        rows.append(("return", *(m[0] for m in (
            bundle.metrics_capm, bundle.metrics_incomplete, bundle.metrics_investor))))
        rows.append(("risk", *(m[1] for m in (
            bundle.metrics_capm, bundle.metrics_incomplete, bundle.metrics_investor))))
        return _rows_to_text(("asset", "w_capm", "w_incomplete", "w_investor"), rows)
    if figure_id == 3:
        sens = bundle.sensitivity
        rows = []
        for k in range(len(labels)):
            rows.append((
                labels[k],
                bundle.shadow_costs[k],
                sens.grad_shadow_costs[k],
                int(np.sign(sens.grad_shadow_costs[k])),
                bundle.w_incomplete[k],
                sens.grad_weights[k],
                int(np.sign(sens.grad_weights[k])),
            ))
        return _rows_to_text(
            ("asset", "shadow_cost", "dextra_dshadow", "sign_shadow",
             "weight", "dextra_dweight", "sign_weight"),
            rows,
        )
    if figure_id == 4:
        rows = []
        for (g, tv), mat in sorted(bundle.sigma_gamma_sweep.items()):
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    rows.append((g, tv, labels[i], labels[j], mat[i, j]))
        return _rows_to_text(("gamma", "tau", "row", "col", "value"), rows)
    if figure_id == 5:
        rows = []
        for tv in sorted(bundle.tau_sweep):
            for g in sorted(bundle.tau_sweep[tv]):
                row = bundle.tau_sweep[tv][g]
                for k in range(len(labels)):
                    rows.append((tv, g, "weight", labels[k], row.weights[k]))
                rows.append((tv, g, "return", "", row.portfolio_return))
                rows.append((tv, g, "risk", "", row.portfolio_risk))
        return _rows_to_text(("tau", "gamma", "series", "asset", "value"), rows)
    if figure_id == 6:
        rows = []
        for name in sorted(bundle.posterior_rows):
            mat = bundle.posterior_rows[name].covariance
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    rows.append((name, labels[i], labels[j], mat[i, j]))
        return _rows_to_text(("model", "row", "col", "value"), rows)
    if figure_id == 7:
        rows = []
        for cv in sorted(bundle.c_sweep):
            for name in sorted(bundle.c_sweep[cv]):
                row = bundle.c_sweep[cv][name]
                for k in range(len(labels)):
                    rows.append((cv, name, "weight", labels[k], row.weights[k]))
                rows.append((cv, name, "return", "", row.portfolio_return))
                rows.append((cv, name, "risk", "", row.portfolio_risk))
                rows.append((cv, name, "view_fit", "", row.fit))
        return _rows_to_text(("c", "model", "series", "asset", "value"), rows)
    raise ValueError(f"unknown figure id {figure_id}")
