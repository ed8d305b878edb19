"""Shared fixtures: trap parameter factories and a cross-module solve cache."""

from functools import lru_cache

import pytest

from drumhead import TrapParams, diagonalize, solve_equilibrium, transverse_stiffness

AXIAL_HZ = 795e3
CYCLOTRON_HZ = 7.6e6


def paper_trap(rotation_hz: float = 43.2e3, wall: float = 0.0) -> TrapParams:
    return TrapParams.from_hz(AXIAL_HZ, CYCLOTRON_HZ, rotation_hz, delta_wall=wall)


@lru_cache(maxsize=64)
def solve_cached(n_ions: int, rotation_hz: float = 43.2e3, wall: float = 0.0, seed: int = 0):
    return solve_equilibrium(paper_trap(rotation_hz, wall), n_ions, seed=seed)


@lru_cache(maxsize=64)
def spectrum_cached(n_ions: int, rotation_hz: float = 43.2e3, wall: float = 0.0, seed: int = 0):
    return diagonalize(transverse_stiffness(solve_cached(n_ions, rotation_hz, wall, seed)))


@pytest.fixture(scope="session")
def lattice_190():
    return solve_cached(190, 44.7e3)


@pytest.fixture(scope="session")
def spectrum_190():
    return spectrum_cached(190, 44.7e3)
