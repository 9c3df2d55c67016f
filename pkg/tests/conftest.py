import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


def random_vector(rng, M, complex_field):
    v = rng.standard_normal(M)
    if complex_field:
        v = v + 1j * rng.standard_normal(M)
    return v


# one PASS/FAIL line per acceptance criterion, printed after the run
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[name] = ("PASS" if report.outcome == "passed" else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{outcome}  {name}  {detail}".rstrip())
