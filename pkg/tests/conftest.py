"""Shared fixtures.

The coupled solver is expensive at production resolution, so converged
records and the full continuation branch are computed once per session and
shared by the diagnostics, branch and acceptance tests.
"""

import numpy as np
import pytest

from kgmlab.branch import continue_in_epsilon, default_schedule
from kgmlab.ineq import TestFunctionFamily
from kgmlab.matter import FrozenPotential, find_ground_state
from kgmlab.radial import ModelParams, RadialField, default_grid, make_grid

TestFunctionFamily.__test__ = False  # a dataclass, not a test case


@pytest.fixture(scope="session")
def grid():
    """Production grid: geometric stretch, R_max = 200, N = 4000."""
    return default_grid()


@pytest.fixture(scope="session")
def coarse_grid():
    """Small geometric grid for fast unit tests."""
    return make_grid(60.0, 1200, "geometric", ratio=1.004)


@pytest.fixture(scope="session")
def uniform_grid():
    return make_grid(10.0, 1000, "uniform")


@pytest.fixture(scope="session")
def params_eps1():
    return ModelParams(e=1.0, omega=1.0, p=4.0, epsilon=1.0)


@pytest.fixture(scope="session")
def decoupled_ground_state(grid):
    """Ground state of -lap u + u = u^3 on the production grid."""
    W = FrozenPotential.constant(grid, 1.0)
    return find_ground_state(W, 4.0, (1.0, 10.0))


@pytest.fixture(scope="session")
def branch(grid, params_eps1):
    """Full warm-started continuation branch down to epsilon = 0."""
    return continue_in_epsilon(params_eps1, default_schedule(), grid=grid)


@pytest.fixture(scope="session")
def record_eps1(branch):
    """Converged coupled record at epsilon = 1, p = 4, e = omega = 1."""
    return branch.records[0]


@pytest.fixture(scope="session")
def record_eps0(branch):
    """Converged record at the limit epsilon = 0."""
    rec = branch.records[-1]
    assert rec.params.epsilon == 0.0
    return rec


@pytest.fixture(scope="session")
def smooth_profiles(grid):
    """Deterministic batch of random smooth decaying profiles on the grid."""
    rng = np.random.default_rng(20260826)
    out = []
    r = grid.nodes
    for _ in range(100):
        amp = rng.uniform(0.2, 3.0, size=3)
        width = rng.uniform(0.5, 4.0, size=3)
        shift = rng.uniform(0.0, 3.0, size=3)
        vals = sum(a * np.exp(-((r - s) ** 2) / (2 * w**2))
                   for a, w, s in zip(amp, width, shift))
        out.append(RadialField(grid, vals))
    return out
