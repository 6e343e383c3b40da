import numpy as np
import pytest

from cbpnet import AttachmentKernel, OutDegreeDistribution

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pa():
    return AttachmentKernel.linear(1.0, 0.0)


@pytest.fixture
def ones():
    return OutDegreeDistribution.point(1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def within_se(samples, target, k=3.0):
    x = np.asarray(samples, dtype=np.float64)
    se = x.std(ddof=1) / np.sqrt(x.size)
    return abs(x.mean() - target) <= k * se, x.mean(), se
