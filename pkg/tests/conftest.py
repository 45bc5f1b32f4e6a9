import numpy as np
import pytest

from esavcpd import ParticleState, experiment_field

_CRITERIA = {}


@pytest.fixture
def std_init():
    return ParticleState([0.0, 1.0, 0.1], [0.09, 0.05, 0.2])


@pytest.fixture
def std_model():
    return experiment_field(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record an acceptance verdict; printed in the terminal summary."""

    def record(number, title, passed, detail):
        _CRITERIA[number] = (title, passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
