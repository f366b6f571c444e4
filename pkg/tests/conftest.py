import pytest

import paperdata


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion id for the summary"
    )


@pytest.fixture
def market():
    return paperdata.market()


@pytest.fixture
def shadow():
    return paperdata.shadow()


@pytest.fixture
def paper_views():
    return paperdata.views()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            for name, args in getattr(report, "user_properties", []):
                if name == "criterion":
                    lines.append((args, outcome.upper()))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(lines):
        terminalreporter.write_line(f"{outcome:>6s}  {name}")
