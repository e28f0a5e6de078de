import pytest

from auxmean.report import published_population
from auxmean.sampling import PopulationFrame

_ACCEPTANCE = {}


@pytest.fixture
def pop1():
    return published_population(1)


@pytest.fixture
def pop2():
    return published_population(2)


@pytest.fixture
def tiny_frame():
    return PopulationFrame(y=[1, 2, 3, 4, 5], x=[2.0, 3.5, 5.0, 9.0, 10.5])


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
