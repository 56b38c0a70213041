"""Session-wide fixtures: one shared grid and solved-profile cache.

Profile solves are the slowest step in the suite; sharing one
continuation cache across test modules keeps every downstream consumer
(profile checks, modulation right-hand sides, acceptance gates) on the
same warm ladder.
"""
import pytest

from hwlab.profiles import ProfileCache, solve_ground_state
from hwlab.spectral import Grid1D


@pytest.fixture(scope="session")
def grid400():
    return Grid1D(n=2**15, length=400.0)


@pytest.fixture(scope="session")
def cache(grid400):
    return ProfileCache(grid400, tol=1e-9)


@pytest.fixture(scope="session")
def p999(cache):
    return cache.get(0.999)


@pytest.fixture(scope="session")
def p95(cache):
    return cache.get(0.95)


@pytest.fixture(scope="session")
def ground(grid400):
    return solve_ground_state(grid400, tol=1e-9)
