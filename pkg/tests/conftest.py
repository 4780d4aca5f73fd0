import numpy as np
import pytest

from skorokhod.paths import TimeGrid

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        number, title = marker.args
        prev = _CRITERIA.get(number, ("PASS", title))
        status = "PASS" if rep.passed and prev[0] == "PASS" else "FAIL"
        _CRITERIA[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")


@pytest.fixture
def step_grid():
    return TimeGrid(np.array([0.0, 1 / 3, 2 / 3, 1.0]))
