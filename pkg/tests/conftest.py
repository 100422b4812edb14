import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gsbm.profiles import make_piecewise_linear_profile, make_step_profile


@pytest.fixture
def step_profile():
    return make_step_profile(0.9, 0.1, 1.0)


@pytest.fixture
def crossing_profile():
    """f_in and f_out symmetric crossing lines: f_diff(t) = 1.6 t - 0.8."""
    return make_piecewise_linear_profile(
        [(0.0, 0.9), (1.0, 0.1)], [(0.0, 0.1), (1.0, 0.9)], 1.0
    )


def random_profile(rng, r=1.0):
    """Random piecewise-linear profile with values in (0.1, 0.9)."""
    n_knots = int(rng.integers(2, 5))
    ts = np.sort(rng.random(n_knots - 1)) * r
    ts = np.concatenate([[0.0], ts, [r]])
    ts = np.unique(ts)
    vals_in = 0.1 + 0.8 * rng.random(len(ts))
    vals_out = 0.1 + 0.8 * rng.random(len(ts))
    return make_piecewise_linear_profile(
        list(zip(ts, vals_in)), list(zip(ts, vals_out)), r
    )
