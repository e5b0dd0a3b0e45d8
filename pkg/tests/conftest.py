import math
import time

import numpy as np
import pytest

from stark_embed import constructor
from stark_embed.prufer import solve, warmup
from stark_embed.transform import StarkFrame

ACCEPTANCE = {}


@pytest.fixture(scope="session", autouse=True)
def _jit():
    # compile the kernel once so timed checks measure integration, not numba
    warmup()


@pytest.fixture(scope="session")
def frame1():
    return StarkFrame(1.0)


@pytest.fixture(scope="session")
def free_pair(frame1):
    """V = 0, E in {0, 1}, theta0 = 0 on [1, 1e6]."""
    return solve(frame1, [0.0, 1.0], 0.0, 0.0, 1.0, 1e6)


@pytest.fixture(scope="session")
def sign_pi6(frame1):
    return constructor.construct_single(0.0, math.pi / 6, 0.0, 1e6, frame1,
                                        passive_energies=[1.0])


@pytest.fixture(scope="session")
def glued():
    """N = 2 glued potential, W = 9 blocks realized up to xi = 1e6."""
    t0 = time.perf_counter()
    s = constructor.schedule_finite(2, 9)
    g = constructor.glue(s.plan([0.0, 1.0], [0.0, 0.0]), xi_max=1e6)
    g.build_seconds = time.perf_counter() - t0
    return g


@pytest.fixture(scope="session")
def glued_w4():
    s = constructor.schedule_finite(2, 4)
    return s, constructor.glue(s.plan([0.0, 1.0], [0.0, 0.0]))


@pytest.fixture
def record(request):
    """Register the one-line outcome of an acceptance criterion."""
    def _record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(
            f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
