"""Shared fixtures: scenario sets and prepared inputs reused across tests."""

import numpy as np
import pytest

from pensionsim import ModelParams, SimulationInputs, simulate
from pensionsim.market import AnnuitySpec


def flat_params(mean_x=0.04, mean_pi=0.0, mean_level=0.0, wage_spread=0.0):
    """Zero-volatility parameters: every path is the deterministic mean path."""
    return ModelParams(
        mean_x=mean_x,
        mean_pi=mean_pi,
        mean_level=mean_level,
        mean_slope=0.0,
        std_x=0.0,
        std_pi=0.0,
        std_level=0.0,
        std_slope=0.0,
        wage_spread=wage_spread,
    )


@pytest.fixture(scope="session")
def default_set():
    """2000 paths x 41 years at default calibration; treat as read-only."""
    return simulate(ModelParams(), 2000, 41, seed=42)


@pytest.fixture(scope="session")
def default_inputs(default_set):
    return SimulationInputs.prepare(default_set)


@pytest.fixture(scope="session")
def small_inputs():
    """A cheap 250 x 12 world for structural strategy and solver tests."""
    scenarios = simulate(ModelParams(), 250, 12, seed=7)
    return SimulationInputs.prepare(scenarios, annuity=AnnuitySpec(T=12, N=20))


@pytest.fixture(scope="session")
def flat_inputs():
    """Deterministic world: zero rates, zero inflation, zero wage growth.

    Annuity factors are constant (M = N), so the matching return is zero
    and every projection made with r = 0 coincides with the realized path.
    """
    scenarios = simulate(flat_params(), 4, 10, seed=3)
    return SimulationInputs.prepare(scenarios, annuity=AnnuitySpec(T=10, N=20))
