"""Shared fixtures: cached grids and a one-time kernel warmup."""

import numpy as np
import pytest

from orlicz_flow import FlowConfig, ball_body, build_grid, reciprocal_phi, run


@pytest.fixture(scope="session")
def grid64():
    return build_grid(2, 64)


@pytest.fixture(scope="session")
def grid128():
    return build_grid(2, 128)


@pytest.fixture(scope="session")
def grid256():
    return build_grid(2, 256)


@pytest.fixture(scope="session")
def grid3_64():
    return build_grid(3, 64)


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jitted kernels before any wall-clock assertion."""
    phi = reciprocal_phi()
    cfg = FlowConfig(dt_init=1e-3, tol_speed=1e30, tol_residual=1e30, max_steps=2)
    for n in (2, 3):
        grid = build_grid(n, 16)
        run(ball_body(grid, 1.2), np.ones(grid.num_nodes), phi, cfg)
    return True
