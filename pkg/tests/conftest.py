"""Shared pytest fixtures and utilities for all tests."""

import os

import pytest

from initial_data.core import profile
from initial_data.types import DataPair
from radial_grid.core import RadialGrid, build_grid


def _slow_enabled() -> bool:
    """Check if desk-scale runs were requested."""
    return os.environ.get("WAVELAB_RUN_SLOW") == "1"


# Skip marker for desk-scale runs (minutes rather than seconds)
requires_slow = pytest.mark.skipif(
    not _slow_enabled(), reason="Desk-scale run - set WAVELAB_RUN_SLOW=1"
)


@pytest.fixture
def gaussian_pair() -> DataPair:
    """f = exp(-r^2), g = 0."""
    return profile("gaussian")


@pytest.fixture
def velocity_pair() -> DataPair:
    """f = 0, g = exp(-r^2)."""
    return profile("gaussian", amplitude=0.0, velocity_amplitude=1.0)


@pytest.fixture
def fine_grid() -> RadialGrid:
    """r_max = 8 with dr = 0.01, for quadrature checks."""
    return build_grid(8.0, 800)


@pytest.fixture
def wave_grid() -> RadialGrid:
    """r_max = 16 with dr = 0.05, large enough for short free-wave runs."""
    return build_grid(16.0, 320)
