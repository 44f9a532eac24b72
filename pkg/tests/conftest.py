from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = _CRITERIA.get(report.nodeid)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        marker["outcome"] = "PASS" if report.passed else "FAIL"


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = {"number": m.args[0], "title": m.args[1], "outcome": None}


def pytest_terminal_summary(terminalreporter):
    rows = sorted((c for c in _CRITERIA.values() if c["outcome"]), key=lambda c: c["number"])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for c in rows:
        terminalreporter.write_line(f"{c['outcome']}  criterion {c['number']}: {c['title']}")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def app_skills():
    return FIXTURES / "skills"
