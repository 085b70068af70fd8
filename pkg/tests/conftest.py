import numpy as np
import pytest

from chtdqn import environment as env


@pytest.fixture
def two_node_profiles():
    """b=[5,3], c_D=[2,1]; attacker-side values mirror the defender's."""
    return [
        env.NodeProfile(b=5.0, b_hat=5.0, c_D=2.0, c_A=2.0),
        env.NodeProfile(b=3.0, b_hat=3.0, c_D=1.0, c_A=1.0),
    ]


@pytest.fixture
def econ():
    return env.EconParams()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance criteria verdicts where capture cannot eat them."""
    import sys

    module = sys.modules.get("test_acceptance") \
        or sys.modules.get("tests.test_acceptance")
    if module is None:
        return
    lines = getattr(module, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
