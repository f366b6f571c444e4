import json
import shutil
import subprocess
import sys
from importlib import resources

import pytest

from shadowcap.cli import main
from shadowcap.scenario import load_paper_scenario, parse_scenario, serialize_scenario


@pytest.fixture(scope="module")
def paper_file(tmp_path_factory):
    target = tmp_path_factory.mktemp("scenario") / "paper.scenario"
    text = resources.files("shadowcap.data").joinpath("paper_tables.scenario").read_text()
    target.write_text(text)
    return str(target)


def test_validate_ok(paper_file, capsys):
    assert main(["validate", paper_file]) == 0
    out = capsys.readouterr().out
    assert "ok: 5 assets, 4 views" in out
    assert "WARNING" in out  # joint block PSD warning


def test_validate_broken_scenario(tmp_path, capsys):
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    doc["market"]["sigma"][0][1] = 0.021
    bad = tmp_path / "bad.scenario"
    bad.write_text(json.dumps(doc))
    with pytest.raises(SystemExit) as err:
        main(["validate", str(bad)])
    assert err.value.code == 2


def test_missing_file_is_io_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["validate", "/nonexistent/path.scenario"])
    assert err.value.code == 4


def test_report_table4_prints_published_values(paper_file, capsys):
    assert main(["report", paper_file, "--table", "4"]) == 0
    out = capsys.readouterr().out
    assert "-0.0394" in out and "0.0605" in out  # incomplete-market weights
    assert "0.0076" in out and "0.0259" in out  # capm metrics


def test_report_table5(paper_file, capsys):
    assert main(["report", paper_file, "--table", "5"]) == 0
    out = capsys.readouterr().out
    assert "8.0000" in out
    assert "7.417475e-04" in out
    assert "0.2967" in out


def test_report_table7(paper_file, capsys):
    assert main(["report", paper_file, "--table", "7"]) == 0
    out = capsys.readouterr().out
    for token in ("0.0320", "0.3997", "0.6657", "0.2203"):
        assert token in out


def test_equilibrium_with_gamma(paper_file, capsys):
    assert main(["equilibrium", paper_file, "--gamma", "1"]) == 0
    out = capsys.readouterr().out
    assert "w_gamma1" in out and "-0.1532" in out


def test_posterior_command(paper_file, capsys):
    assert main(["posterior", paper_file, "--gamma", "1", "--c", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "posterior_mean" in out and "0.0320" in out


def test_allocate_min_variance(paper_file, capsys):
    assert main([
        "allocate", paper_file, "--objective", "min_variance", "--assets", "2,4",
    ]) == 0
    out = capsys.readouterr().out
    assert "Asset 2" in out and "Asset 4" in out


def test_allocate_infeasible_cap(paper_file, capsys):
    code = main([
        "allocate", paper_file, "--objective", "risk_budget_constrained",
        "--sigma-cap", "0.0001",
    ])
    assert code == 2
    assert "below the minimum" in capsys.readouterr().err


def test_figure_export_deterministic(paper_file, tmp_path, capsys):
    out1 = tmp_path / "fig3a.tsv"
    out2 = tmp_path / "fig3b.tsv"
    assert main(["figure", paper_file, "--id", "3", "--out", str(out1)]) == 0
    assert main(["figure", paper_file, "--id", "3", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("asset\tshadow_cost")


def test_figure_unknown_id(paper_file, capsys):
    assert main(["figure", paper_file, "--id", "99", "--out", "/tmp/x.tsv"]) == 2


def test_sample_command_deterministic(paper_file, tmp_path, capsys):
    out1 = tmp_path / "draws1.tsv"
    out2 = tmp_path / "draws2.tsv"
    assert main(["sample", paper_file, "--count", "50", "--seed", "3",
                 "--out", str(out1)]) == 0
    assert main(["sample", paper_file, "--count", "50", "--seed", "3",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().splitlines()) == 51


def test_solver_failure_exit_code(tmp_path, capsys):
    doc = json.loads(serialize_scenario(load_paper_scenario()))
    # single asset with shadow costs too large for a real equilibrium
    doc["market"] = {
        "asset_labels": ["only"],
        "sigma": [[0.01]],
        "pi_c": [0.5],
        "r_f": 0.0,
        "expected_market_return": 0.02,
        "sigma_m": 0.1,
    }
    doc["shadow_costs"] = {
        "lambda": [0.4],
        "Lambda": [[0.01]],
        "cross_cov": [[0.001]],
        "tau": 0.5,
    }
    del doc["views"]
    del doc["sweeps"]
    path = tmp_path / "explosive.scenario"
    path.write_text(json.dumps(doc))
    with pytest.raises(SystemExit) as err:
        main(["equilibrium", str(path)])
    assert err.value.code == 3


def test_console_entry_point(paper_file):
    exe = shutil.which("shadowcap")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run(
        [exe, "report", paper_file, "--table", "6"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "-0.4966" in proc.stdout


def test_full_precision_flag(paper_file, capsys):
    assert main(["report", paper_file, "--table", "5", "--full-precision"]) == 0
    out = capsys.readouterr().out
    assert "0.2966990002" in out
