import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n_min=3, n_max=20, d_min=2, d_max=12):
    n = int(rng.integers(n_min, n_max + 1))
    d = int(rng.integers(d_min, d_max + 1))
    return rng.standard_normal((n, d)) * rng.uniform(0.5, 5.0, size=d) + rng.uniform(-10, 10, size=d)


_ACCEPTANCE: dict[str, tuple[int, str, str, str]] = {}


def pytest_runtest_logreport(report):
    marker = _MARKERS.get(report.nodeid)
    if marker is None:
        return
    num, title = marker
    detail = getattr(report, "acceptance_detail", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if report.skipped and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _ACCEPTANCE[report.nodeid] = (num, status, title, detail)


_MARKERS: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _MARKERS[item.nodeid] = (m.args[0], m.args[1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.acceptance_detail = getattr(item, "acceptance_detail", "")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, title, detail in sorted(_ACCEPTANCE.values()):
        line = f"[{status}] criterion {num}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
