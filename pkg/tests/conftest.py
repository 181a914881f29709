import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from zonecheck import _dbmpy, dbm, kernels  # noqa: E402

dbm.CHECK_BOUNDS = True

KERNEL_NAMES = ("add", "close", "tighten", "intersect", "includes", "down", "up", "free", "reset", "hull")


@pytest.fixture(params=["native", "python"])
def backend(request, monkeypatch):
    """Run a test once on the selected kernels and once on the pure-Python ones."""
    if request.param == "python":
        for name in KERNEL_NAMES:
            monkeypatch.setattr(kernels, name, getattr(_dbmpy, name))
        monkeypatch.setattr(kernels, "_impl", _dbmpy)
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


_verdicts = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    n = getattr(report, "criterion", None)
    if n is None:
        return
    ok = report.passed
    _verdicts[n] = _verdicts.get(n, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_verdicts):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _verdicts[n] else 'FAIL'}")
