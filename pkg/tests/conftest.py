import numpy as np
import pytest

from vvc_mcm.geometry import BlockSpec
from vvc_mcm.harness.sources import sample_blocks


def noise_blocks(count=120, seed=11, size=128, block=BlockSpec(8, 8), bit_depth=10):
    """Uniform-noise picture cut into seeded 8x8 blocks."""
    img = np.random.default_rng(seed).integers(0, 1 << bit_depth, (size, size))
    return sample_blocks(img, block, count, seed)


@pytest.fixture(scope="session")
def noise_corpus():
    return noise_blocks()


# acceptance outcomes, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])
