"""Bundle everything a strategy needs into one prepared object.

``SimulationInputs.prepare`` fits the expected-inflation estimator on the
scenario set, prices the annuity factor panel and lays out salaries,
franchises and contributions along every path, so strategy runners and
metrics can share one consistent snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .career import (
    CareerSchedule,
    contribution_path,
    default_schedule,
    franchise_path,
    salary_path,
)
from .errors import ParameterError
from .lsmc import InflationEstimator
from .market import AnnuitySpec, MarketValueSeries, market_value_series
from .scenario import ScenarioSet

__all__ = ["SimulationInputs"]


@dataclass
class SimulationInputs:
    """Scenario set plus all derived panels used by strategies and metrics."""

    scenarios: ScenarioSet
    annuity: AnnuitySpec
    schedule: CareerSchedule
    inflation: InflationEstimator
    market: MarketValueSeries
    salaries: np.ndarray
    franchises: np.ndarray
    contributions: np.ndarray

    @property
    def T(self) -> int:
        return self.annuity.T

    @property
    def n_paths(self) -> int:
        return self.scenarios.n_paths

    @classmethod
    def prepare(
        cls,
        scenarios: ScenarioSet,
        annuity: AnnuitySpec | None = None,
        schedule: CareerSchedule | None = None,
        inflation_floor: float = 0.5,
    ) -> "SimulationInputs":
        """Fit estimators and lay out career panels for ``scenarios``.

        The career schedule is truncated to the accumulation horizon, so a
        shorter ``annuity.T`` simply uses the first ``T + 1`` career ages.
        """
        schedule = schedule if schedule is not None else default_schedule()
        if annuity is None:
            annuity = AnnuitySpec(T=schedule.n_years - 1, N=20)
        if annuity.T > scenarios.horizon:
            raise ParameterError(
                f"accumulation horizon T={annuity.T} exceeds scenario horizon "
                f"{scenarios.horizon}"
            )
        if annuity.T + 1 > schedule.n_years:
            raise ParameterError(
                f"career schedule covers {schedule.n_years} years but the "
                f"accumulation horizon needs {annuity.T + 1}"
            )
        schedule = schedule.truncated(annuity.T + 1)
        inflation = InflationEstimator.fit(scenarios, annuity.T, floor=inflation_floor)
        market = market_value_series(scenarios, annuity, inflation)
        w = scenarios.w[:, : annuity.T + 1]
        return cls(
            scenarios=scenarios,
            annuity=annuity,
            schedule=schedule,
            inflation=inflation,
            market=market,
            salaries=salary_path(w, schedule),
            franchises=franchise_path(w, schedule),
            contributions=contribution_path(w, schedule),
        )
