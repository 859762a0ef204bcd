from __future__ import annotations

from collections import defaultdict

import pytest

from tsow.algorithms import build_for
from tsow.oracle import make_builtin

_CRITERIA: dict[int, list[str]] = defaultdict(list)
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    _TITLES[number] = title
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[number].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        outcomes = _CRITERIA[number]
        verdict = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}  {verdict}  {_TITLES[number]}  ({len(outcomes)} checks)")


@pytest.fixture(scope="session")
def grover2():
    return make_builtin("grover", 2)


@pytest.fixture(scope="session")
def grover2_algo(grover2):
    return build_for("grover", 2, grover2)


@pytest.fixture(scope="session")
def dj2():
    return make_builtin("dj", 2)


@pytest.fixture(scope="session")
def dj2_algo(dj2):
    return build_for("dj", 2, dj2)


@pytest.fixture(scope="session")
def simon2():
    return make_builtin("simon", 2)
