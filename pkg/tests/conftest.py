import numpy as np
import pytest

from cjdesign import kernels


def random_psd(n, rng, rank=None):
    k = n if rank is None else rank
    B = rng.standard_normal((n, k))
    return B @ B.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
