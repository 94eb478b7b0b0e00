import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


class AcceptanceLog:
    def __init__(self):
        self.lines = {}

    def record(self, number, ok, detail):
        self.lines[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(self.lines[number])
        return ok


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance_log():
    return _LOG


def pytest_terminal_summary(terminalreporter):
    if _LOG.lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LOG.lines):
            terminalreporter.write_line(_LOG.lines[n])
