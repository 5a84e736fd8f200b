import numpy as np
import pytest

from polaron.model import ModelConfig, build_discrete_bath

ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def default_bath():
    return build_discrete_bath(ModelConfig(alpha=0.1))


@pytest.fixture(scope="session")
def mini_bath():
    """Three positive-momentum modes of a short line (oracle-sized)."""
    def make(alpha, gaps=(1.0,), positions=None, modes=(4, 5, 6)):
        cfg = ModelConfig(alpha=alpha, qubit_gaps=gaps, qubit_positions=positions,
                          num_segments=7, line_length=1.0)
        return build_discrete_bath(cfg).subset(list(modes))
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
