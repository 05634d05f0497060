import sys
import os

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criterion_results = {}


def record_criterion(num: int, passed: bool):
    _criterion_results[num] = passed


@pytest.fixture
def criterion():
    """Recorder the acceptance tests use to mark their pass/fail line."""
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criterion_results):
        status = "PASS" if _criterion_results[num] else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}")
