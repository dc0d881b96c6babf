import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one summary line per acceptance criterion before its assertion runs."""
    def rec(num, label, measured, tol, ok):
        ACCEPTANCE[num] = f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {label:<58s} {measured:.3e}  (tol {tol:.1e})"
        return ok
    return rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
