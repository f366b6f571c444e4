"""Scenario file format: strict JSON with path-qualified errors.

The canonical form is sorted-key, two-space-indented JSON whose floats use
Python repr, so parse -> serialize round-trips losslessly and fixtures diff
cleanly. Unknown keys are rejected, naming the offending path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from .domain import (
    MarketScenario,
    RandomMeanSpec,
    ShadowCostSpec,
    ShadowCapError,
    ValidationReport,
    ViewSet,
    validate_scenario,
)

SCHEMA_VERSION = 1


class ScenarioFormatError(ShadowCapError):
    """Parse or validation failure, qualified by the JSON path."""

    def __init__(self, path: str, message: str, issues=()):
        self.path = path
        self.issues = tuple(issues)
        label = path if path else "<root>"
        super().__init__(f"{label}: {message}")


@dataclass(frozen=True)
class Sweeps:
    tau: tuple = ()
    c: tuple = ()
    gamma: tuple = ()


@dataclass(frozen=True)
class ScenarioFile:
    schema_version: int
    market: MarketScenario
    shadow: ShadowCostSpec
    views: Optional[ViewSet] = None
    sweeps: Sweeps = Sweeps()


def _check_keys(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        raise ScenarioFormatError(path, "expected an object")
    for key in sorted(obj):
        if key not in required and key not in optional:
            raise ScenarioFormatError(_join(path, key), "unknown key")
    for key in required:
        if key not in obj:
            raise ScenarioFormatError(_join(path, key), "missing required key")


def _join(path, key):
    return f"{path}.{key}" if path else key


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _vector(value, path, n=None) -> np.ndarray:
    if not isinstance(value, list):
        raise ScenarioFormatError(path, "expected a list of numbers")
    out = np.array([_number(v, f"{path}[{i + 1}]") for i, v in enumerate(value)])
    if n is not None and out.shape[0] != n:
        raise ScenarioFormatError(path, f"expected {n} entries, got {out.shape[0]}")
    return out


def _matrix(value, path, rows, cols) -> np.ndarray:
    if not isinstance(value, list):
        raise ScenarioFormatError(path, "expected a list of rows")
    if len(value) != rows:
        raise ScenarioFormatError(path, f"expected {rows} rows, got {len(value)}")
    return np.vstack([_vector(r, f"{path}[{i + 1}]", cols) for i, r in enumerate(value)])


def parse_scenario(text: str, validate: bool = True) -> ScenarioFile:
    """Parse and (by default) validate a scenario document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError("", f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc

    _check_keys(raw, "", ("schema_version", "market", "shadow_costs"), ("views", "sweeps"))
    version = raw["schema_version"]
    if version != SCHEMA_VERSION:
        raise ScenarioFormatError("schema_version", f"unsupported version {version!r}")

    market = _parse_market(raw["market"])
    shadow = _parse_shadow(raw["shadow_costs"], market.n)
    views = _parse_views(raw["views"], market.n) if "views" in raw else None
    sweeps = _parse_sweeps(raw["sweeps"]) if "sweeps" in raw else Sweeps()
    out = ScenarioFile(
        schema_version=version, market=market, shadow=shadow, views=views, sweeps=sweeps
    )

    if validate:
        report = validate_scenario(market, shadow, views)
        if not report.ok:
            first = report.errors[0]
            raise ScenarioFormatError(
                first.path, first.message, issues=report.issues
            )
    return out


def _parse_market(obj) -> MarketScenario:
    path = "market"
    _check_keys(
        obj,
        path,
        ("sigma", "pi_c", "r_f", "expected_market_return", "sigma_m"),
        ("asset_labels",),
    )
    sigma_raw = obj["sigma"]
    if not isinstance(sigma_raw, list) or not sigma_raw:
        raise ScenarioFormatError(f"{path}.sigma", "expected a nonempty list of rows")
    n = len(sigma_raw)
    labels = obj.get("asset_labels", [f"Asset {i + 1}" for i in range(n)])
    if not isinstance(labels, list) or len(labels) != n:
        raise ScenarioFormatError(
            f"{path}.asset_labels", f"expected {n} labels to match sigma"
        )
    try:
        return MarketScenario(
            asset_labels=tuple(str(x) for x in labels),
            sigma=_matrix(sigma_raw, f"{path}.sigma", n, n),
            pi_c=_vector(obj["pi_c"], f"{path}.pi_c", n),
            r_f=_number(obj["r_f"], f"{path}.r_f"),
            expected_market_return=_number(
                obj["expected_market_return"], f"{path}.expected_market_return"
            ),
            sigma_m=_number(obj["sigma_m"], f"{path}.sigma_m"),
        )
    except (ValueError, ShadowCapError) as exc:
        if isinstance(exc, ScenarioFormatError):
            raise
        raise ScenarioFormatError(path, str(exc)) from exc


def _parse_shadow(obj, n: int) -> ShadowCostSpec:
    path = "shadow_costs"
    _check_keys(obj, path, ("lambda", "Lambda", "cross_cov", "tau"), ("random_mean",))
    random_mean = None
    if "random_mean" in obj:
        rm = obj["random_mean"]
        _check_keys(rm, f"{path}.random_mean", ("lambda_1", "tau_1"))
        random_mean = RandomMeanSpec(
            costs=_vector(rm["lambda_1"], f"{path}.random_mean.lambda_1", n),
            tau=_number(rm["tau_1"], f"{path}.random_mean.tau_1"),
        )
    try:
        return ShadowCostSpec(
            costs=_vector(obj["lambda"], f"{path}.lambda", n),
            cost_cov=_matrix(obj["Lambda"], f"{path}.Lambda", n, n),
            cross_cov=_matrix(obj["cross_cov"], f"{path}.cross_cov", n, n),
            tau=_number(obj["tau"], f"{path}.tau"),
            random_mean=random_mean,
        )
    except (ValueError, ShadowCapError) as exc:
        if isinstance(exc, ScenarioFormatError):
            raise
        raise ScenarioFormatError(path, str(exc)) from exc


def _parse_views(obj, n: int) -> ViewSet:
    path = "views"
    _check_keys(obj, path, ("P", "q", "kinds"), ("confidence", "omega"))
    P_raw = obj["P"]
    if not isinstance(P_raw, list) or not P_raw:
        raise ScenarioFormatError(f"{path}.P", "expected a nonempty list of rows")
    v = len(P_raw)
    kinds = obj["kinds"]
    if not isinstance(kinds, list) or len(kinds) != v:
        raise ScenarioFormatError(f"{path}.kinds", f"expected {v} view kinds")
    confidence = obj.get("confidence")
    omega = obj.get("omega")
    if (confidence is None) == (omega is None):
        raise ScenarioFormatError(path, "exactly one of confidence or omega is required")
    try:
        return ViewSet(
            P=_matrix(P_raw, f"{path}.P", v, n),
            q=_vector(obj["q"], f"{path}.q", v),
            kinds=tuple(str(k) for k in kinds),
            confidence=None if confidence is None else _number(confidence, f"{path}.confidence"),
            omega=None if omega is None else _matrix(omega, f"{path}.omega", v, v),
        )
    except (ValueError, ShadowCapError) as exc:
        if isinstance(exc, ScenarioFormatError):
            raise
        raise ScenarioFormatError(path, str(exc)) from exc


def _parse_sweeps(obj) -> Sweeps:
    path = "sweeps"
    _check_keys(obj, path, (), ("tau", "c", "gamma"))
    tau = tuple(_vector(obj.get("tau", []), f"{path}.tau").tolist())
    c = tuple(_vector(obj.get("c", []), f"{path}.c").tolist())
    gamma_raw = obj.get("gamma", [])
    gamma = []
    for i, g in enumerate(gamma_raw):
        if g not in (0, 1):
            raise ScenarioFormatError(f"{path}.gamma[{i + 1}]", "gamma values must be 0 or 1")
        gamma.append(int(g))
    return Sweeps(tau=tau, c=c, gamma=tuple(gamma))


def scenario_to_dict(sf: ScenarioFile) -> dict:
    m = sf.market
    out = {
        "schema_version": sf.schema_version,
        "market": {
            "asset_labels": list(m.asset_labels),
            "sigma": m.sigma.tolist(),
            "pi_c": m.pi_c.tolist(),
            "r_f": m.r_f,
            "expected_market_return": m.expected_market_return,
            "sigma_m": m.sigma_m,
        },
        "shadow_costs": {
            "lambda": sf.shadow.costs.tolist(),
            "Lambda": sf.shadow.cost_cov.tolist(),
            "cross_cov": sf.shadow.cross_cov.tolist(),
            "tau": sf.shadow.tau,
        },
    }
    if sf.shadow.random_mean is not None:
        out["shadow_costs"]["random_mean"] = {
            "lambda_1": sf.shadow.random_mean.costs.tolist(),
            "tau_1": sf.shadow.random_mean.tau,
        }
    if sf.views is not None:
        views = {
            "P": sf.views.P.tolist(),
            "q": sf.views.q.tolist(),
            "kinds": list(sf.views.kinds),
        }
        if sf.views.confidence is not None:
            views["confidence"] = sf.views.confidence
        else:
            views["omega"] = sf.views.omega.tolist()
        out["views"] = views
    if sf.sweeps != Sweeps():
        sweeps = {}
        if sf.sweeps.tau:
            sweeps["tau"] = list(sf.sweeps.tau)
        if sf.sweeps.c:
            sweeps["c"] = list(sf.sweeps.c)
        if sf.sweeps.gamma:
            sweeps["gamma"] = list(sf.sweeps.gamma)
        out["sweeps"] = sweeps
    return out


def serialize_scenario(sf: ScenarioFile) -> str:
    """Canonical text form: sorted keys, 2-space indent, repr floats."""
    return json.dumps(scenario_to_dict(sf), indent=2, sort_keys=True) + "\n"


def validation_report(sf: ScenarioFile) -> ValidationReport:
    return validate_scenario(sf.market, sf.shadow, sf.views)


def load_paper_scenario() -> ScenarioFile:
    """The bundled five-asset benchmark dataset."""
    text = resources.files("shadowcap.data").joinpath("paper_tables.scenario").read_text()
    return parse_scenario(text)
