"""Capital-market equilibria under incomplete information with Bayesian views."""

from .domain import (
    InformationSet,
    MarketScenario,
    RandomMeanSpec,
    ShadowCostSpec,
    ValidationReport,
    ViewSet,
    validate_scenario,
)
from .scenario import ScenarioFile, load_paper_scenario, parse_scenario, serialize_scenario

__all__ = [
    "InformationSet",
    "MarketScenario",
    "RandomMeanSpec",
    "ScenarioFile",
    "ShadowCostSpec",
    "ValidationReport",
    "ViewSet",
    "load_paper_scenario",
    "parse_scenario",
    "serialize_scenario",
    "validate_scenario",
]

__version__ = "0.1.0"
