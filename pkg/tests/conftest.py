import numpy as np
import pytest

from ltpf.config import QoSProfile, SimConfig, validate_config
from ltpf.phy import RateModel

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def unit_model():
    # rate = log2(1 + h^2): pick h^2 = 2^r - 1 for an integer rate r
    return RateModel(1.0, 1.0, 1.0, 1.0)


def gains_for_rates(rates):
    return np.sqrt(2.0 ** np.asarray(rates, dtype=float) - 1.0)


def small_config(num_users=3, num_subcarriers=4, window_frames=2, num_windows=3, **kw):
    cfg = SimConfig.table1(num_users=num_users, num_subcarriers=num_subcarriers,
                           window_frames=window_frames, num_windows=num_windows, **kw)
    qos = QoSProfile(np.linspace(1e5, 3e5, num_users))
    return validate_config(cfg, qos)


@pytest.fixture
def table1():
    from ltpf.config import load_config
    cfg, qos = load_config("table1.cfg")
    return validate_config(cfg, qos)
