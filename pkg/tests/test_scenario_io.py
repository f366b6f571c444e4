import json

import numpy as np
import pytest

import paperdata
from shadowcap.scenario import (
    ScenarioFormatError,
    load_paper_scenario,
    parse_scenario,
    serialize_scenario,
)


def test_bundled_scenario_matches_published_inputs():
    sf = load_paper_scenario()
    np.testing.assert_array_equal(sf.market.sigma, paperdata.SIGMA)
    np.testing.assert_array_equal(sf.market.pi_c, paperdata.PI_C)
    assert sf.market.r_f == paperdata.R_F
    assert sf.market.sigma_m == paperdata.SIGMA_M
    np.testing.assert_array_equal(sf.shadow.costs, paperdata.COSTS)
    np.testing.assert_array_equal(sf.shadow.cost_cov, paperdata.COST_COV)
    np.testing.assert_array_equal(sf.shadow.cross_cov, paperdata.CROSS_COV)
    assert sf.shadow.tau == paperdata.TAU
    np.testing.assert_array_equal(sf.views.P, paperdata.P)
    np.testing.assert_array_equal(sf.views.q, paperdata.Q)
    assert sf.views.kinds == paperdata.KINDS
    assert sf.views.confidence == paperdata.CONFIDENCE
    assert sf.sweeps.tau == (0.1, 0.5, 0.9)
    assert sf.sweeps.c == (0.01, 0.5, 0.99)
    assert sf.sweeps.gamma == (0, 1)


def test_round_trip_is_identity_on_canonical_form():
    sf = load_paper_scenario()
    canonical = serialize_scenario(sf)
    assert serialize_scenario(parse_scenario(canonical)) == canonical


def test_full_precision_numbers_survive():
    value = 0.012345678901234567
    sf = load_paper_scenario()
    doc = json.loads(serialize_scenario(sf))
    doc["shadow_costs"]["tau"] = value
    parsed = parse_scenario(json.dumps(doc))
    assert parsed.shadow.tau == value


def test_empty_file_is_root_error():
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario("")
    assert err.value.path == ""


def test_unknown_key_is_path_qualified():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["views"]["Q"] = [1, 2, 3, 4]
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "views.Q"
    assert "unknown key" in str(err.value)


def test_sigma_row_count_mismatch_names_field():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["market"]["sigma"][0] = [0.05, 0.02, 0.04, 0.03]  # 4 entries in a 5-asset row
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "market.sigma[1]"


def test_vector_length_mismatch():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["market"]["pi_c"] = [0.01, 0.02]
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "market.pi_c"
    assert "expected 5" in str(err.value)


def test_missing_required_key():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    del doc["market"]["sigma_m"]
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "market.sigma_m"


def test_schema_version_checked():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["schema_version"] = 99
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "schema_version"


def test_confidence_and_omega_mutually_exclusive():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["views"]["omega"] = paperdata.OMEGA_HALF.tolist()
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "views"


def test_validation_errors_surface_with_issues():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["market"]["sigma"][0][1] = 0.021  # breaks symmetry
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "market.sigma"
    assert err.value.issues  # full report attached for callers


def test_parse_without_validation_skips_numeric_checks():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["market"]["sigma"][0][1] = 0.021
    sf = parse_scenario(json.dumps(doc), validate=False)
    assert sf.market.sigma[0, 1] == 0.021


def test_random_mean_block_round_trips():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["shadow_costs"]["random_mean"] = {
        "lambda_1": [0.01, 0.02, 0.02, 0.01, 0.03],
        "tau_1": 2.0,
    }
    sf = parse_scenario(json.dumps(doc))
    assert sf.shadow.random_mean.tau == 2.0
    again = parse_scenario(serialize_scenario(sf))
    np.testing.assert_array_equal(
        again.shadow.random_mean.costs, sf.shadow.random_mean.costs
    )


def test_bad_gamma_sweep_rejected():
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["sweeps"]["gamma"] = [0, 2]
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(json.dumps(doc))
    assert err.value.path == "sweeps.gamma[2]"
