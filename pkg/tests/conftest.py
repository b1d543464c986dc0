import numpy as np
import pytest

from hlps.geometry import Point2D
from hlps.protocol import User


@pytest.fixture
def rng():
    return np.random.default_rng(20190515)


def make_users(n, privacy=None, start=(0.0, 0.0), spacing=10.0):
    """``n`` users on a horizontal line with ids 1..n."""
    levels = privacy if privacy is not None else [0.5] * n
    return [
        User(i + 1, Point2D(start[0] + i * spacing, start[1]), levels[i])
        for i in range(n)
    ]


# --- acceptance reporting ------------------------------------------------

_criteria: dict[tuple[int, str], str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_runtest_logreport(report):
    key = getattr(report, "criterion", None)
    if key is None:
        return
    if report.failed:
        _criteria[key] = "FAIL"
    elif report.skipped:
        _criteria.setdefault(key, "SKIP")
    elif report.when == "call":
        _criteria.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), status in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
