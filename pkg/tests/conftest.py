import numpy as np
import pytest

from embedq.model import GaussianDos, SystemSpectrum, build_bare_model, build_environment_spectrum

ACCEPTANCE_LINES = []


def fig1_model(dim_e):
    """Two system levels at +-1 coupled to a unit-width Gaussian bath."""
    env = build_environment_spectrum(GaussianDos(1.0), dim_e)
    return build_bare_model(SystemSpectrum([-1.0, 1.0]), env)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_acceptance():
    def record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
