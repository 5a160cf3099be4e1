import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from clifford_szego import BoundarySurface, build_kernel, helper_map

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ball2():
    return BoundarySurface.ball(2)


@pytest.fixture(scope="session")
def disk():
    return BoundarySurface.ball(1)


@pytest.fixture(scope="session")
def image2():
    return BoundarySurface(2, vahlen=helper_map(2))


@pytest.fixture(scope="session")
def kernel_ball2_n6(ball2):
    return build_kernel(ball2, 6, 14)


@pytest.fixture(scope="session")
def kernel_ball2_n8(ball2):
    return build_kernel(ball2, 8)


@pytest.fixture(scope="session")
def kernel_disk_n24(disk):
    return build_kernel(disk, 24)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
