import numpy as np
import pytest

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


def random_unit(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[key] = (marker.args[1], "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k)):
        name, status = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {name}")
