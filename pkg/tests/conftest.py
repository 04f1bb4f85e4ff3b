import numpy as np
import pytest
from hypothesis import settings

from tritangent_cv.algebra import AffineChange

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def complex_box(rng, shape, box):
    """Uniform samples with |Re|, |Im| <= box."""
    return rng.uniform(-box, box, shape) + 1j * rng.uniform(-box, box, shape)


def random_change(rng, scale=1.0):
    """A well-conditioned random affine change with a unit-modulus divisor."""
    while True:
        L = complex_box(rng, (3, 3), 1.0)
        if np.linalg.cond(L) < 50:
            break
    v = complex_box(rng, 3, scale)
    divisor = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return AffineChange(L, v, divisor)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
