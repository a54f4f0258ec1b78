import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from contrastlab.models import DistributionTable, ParamVector


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def logits(k_min=2, k_max=50, bound=50.0):
    return st.integers(k_min, k_max).flatmap(
        lambda k: arrays(np.float64, k, elements=st.floats(-bound, bound)))


def theta_and_table(k_min=2, k_max=50):
    """(theta, p_d) pairs on a common support."""
    def build(k):
        return st.tuples(
            arrays(np.float64, k, elements=st.floats(-10, 10)),
            arrays(np.float64, k, elements=st.floats(1e-3, 1.0)),
        ).map(lambda t: (ParamVector(t[0]), DistributionTable.normalized(t[1])))
    return st.integers(k_min, k_max).flatmap(build)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""
    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
