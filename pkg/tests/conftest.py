import numpy as np
import pytest

from fujita.experiments import canonical_bump
from fujita.fields import Grid, odd_extend


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bump_field(grid: Grid, amplitude: float = 1.0):
    return odd_extend(grid, canonical_bump(grid, amplitude))
