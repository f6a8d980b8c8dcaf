import numpy as np
import pytest

from lvcontrol.model import Parameters

ACCEPTANCE = {}


@pytest.fixture
def coex_params():
    """Coexistence scenario with equal small diffusion."""
    return Parameters(0.01, 0.01, 1.0, 0.8, 0.7, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
