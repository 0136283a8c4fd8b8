"""Shared fixtures and the acceptance summary.

Tests marked ``@pytest.mark.criterion(k, "title")`` feed a PASS/FAIL table
printed at the end of the run, one line per acceptance criterion.
"""
from collections import OrderedDict

import numpy as np
import pytest

from gibbsgate import fixtures

_RESULTS = OrderedDict()
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k, title = marker.args
    _TITLES[k] = title
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _RESULTS[k] = _RESULTS.get(k, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        verdict = "PASS" if _RESULTS[k] else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {k}: {_TITLES[k]}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixture_a():
    return fixtures.fixture_a()


@pytest.fixture
def fixture_b():
    return fixtures.fixture_b()


@pytest.fixture
def triangle():
    return fixtures.lower_triangle(3)


@pytest.fixture
def corner_phi():
    phi = np.zeros((2, 2))
    phi[0, 0] = 1.0
    return phi
