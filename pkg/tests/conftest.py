import numpy as np
import pytest

from medlab.noise import get_model


@pytest.fixture
def gaussian():
    return get_model("gaussian")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one acceptance line: verdict(k, ok, detail)."""
    def record(k, ok, detail):
        ACCEPTANCE[k] = (bool(ok), detail)
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
