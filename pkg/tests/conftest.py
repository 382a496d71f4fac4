import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from refform import corpus  # noqa: E402

CIRCUITS = Path(corpus.path("dff")).parent
GOLDEN = Path(__file__).parent / "golden"

_acceptance = {}


@pytest.fixture
def circuits_dir():
    return CIRCUITS


@pytest.fixture
def golden_dir():
    return GOLDEN


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
