"""Replacement-ratio outcomes, tail risk and strategy evaluation reports.

The replacement ratio annuitizes terminal wealth and divides by the
inflation-indexed average career wage:

    RR_T = (W_T / M_T) * (T + 1) / sum_t s_t * prod_{tau>t} (1 + pi_tau)

Shortfall is the part of RR_T below the investor's target (non-positive by
convention; reports quote the positive mean shortage).  VaR/CVaR use the
lowest ceil(alpha * n) order statistics, deterministic under ties.

Mid-career diagnostics estimate the expected replacement ratio R_t (from
expected terminal wealth and a linear regression of M_T on M_t) and the
target replacement ratio R*(t) implied by the wealth target, whose market
value factor cancels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import SimulationInputs
from .errors import DomainError, EstimatorError, ParameterError
from .lsmc import BasisSpec, ceil_int, regress_now
from .strategies import TargetFrame, TargetParams

__all__ = [
    "EvaluationReport",
    "FrontierRow",
    "REPORT_COLUMNS",
    "ReplacementEstimators",
    "cvar",
    "evaluate_strategy",
    "frontier",
    "replacement_ratio",
    "shortfall",
    "var",
]

REPORT_COLUMNS = (
    "strategy",
    "mean",
    "median",
    "var5",
    "var10",
    "cvar5",
    "cvar10",
    "shortage",
    "goal_reached",
    "est_err_mean",
    "est_err_std",
)


def _indexation(pi: np.ndarray) -> np.ndarray:
    """prod_{tau=t+1..T} (1 + pi_tau) for every t, shape like ``pi``."""
    growth = 1.0 + pi[:, 1:]
    out = np.ones_like(pi)
    out[:, :-1] = np.cumprod(growth[:, ::-1], axis=1)[:, ::-1]
    return out


def replacement_ratio(w_T, M_T, salaries, inflations) -> np.ndarray:
    """Pension from annuitized wealth over the indexed average wage."""
    w_T = np.asarray(w_T, dtype=float)
    M_T = np.asarray(M_T, dtype=float)
    salaries = np.atleast_2d(np.asarray(salaries, dtype=float))
    inflations = np.atleast_2d(np.asarray(inflations, dtype=float))
    if salaries.shape != inflations.shape:
        raise ParameterError("salaries and inflations must share one shape per path")
    if np.any(M_T <= 0.0):
        raise DomainError("market value factor at retirement must be positive")
    T = salaries.shape[1] - 1
    denom = (salaries * _indexation(inflations)).sum(axis=1)
    if np.any(denom <= 0.0):
        raise DomainError("indexed wage sum must be positive")
    out = w_T / M_T * (T + 1) / denom
    return out if out.ndim else float(out)


def shortfall(rr, target: float):
    """Non-positive gap of the replacement ratio below the target."""
    return np.minimum(np.asarray(rr, dtype=float) - target, 0.0)


def _tail_count(samples: np.ndarray, alpha: float) -> int:
    if samples.size == 0:
        raise DomainError("need at least one sample")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"quantile level {alpha} outside (0, 1)")
    return min(ceil_int(alpha * samples.size), samples.size)


def var(samples, alpha: float) -> float:
    """Empirical lower-tail value at risk: the ceil(alpha*n)-th smallest."""
    s = np.asarray(samples, dtype=float).ravel()
    nc = _tail_count(s, alpha)
    return float(np.partition(s, nc - 1)[nc - 1])


def cvar(samples, alpha: float) -> float:
    """Mean of the ceil(alpha*n) smallest samples."""
    s = np.asarray(samples, dtype=float).ravel()
    nc = _tail_count(s, alpha)
    return float(np.partition(s, nc - 1)[:nc].mean())


class ReplacementEstimators:
    """Mid-career replacement-ratio estimators on one prepared input set.

    Fits one global linear regression of M_T on M_t per year and projects
    future contributions and wage indexation from the current expected
    inflation (plus the wage spread), so both R_t and R*(t) are computable
    at any year from information available then.
    """

    def __init__(self, inputs: SimulationInputs, params: TargetParams):
        self.inputs = inputs
        self.params = params
        self.frame = TargetFrame.build(inputs, params)
        T = inputs.T
        M = inputs.market.M
        basis = BasisSpec.linear()
        self._m_fits = [regress_now(M[:, t], M[:, T], basis) for t in range(T)]
        self._basis = basis
        self._den_cache: dict = {}
        self._contrib_cache: dict = {}

    # -- building blocks ---------------------------------------------------

    def expected_market_factor(self, t: int) -> np.ndarray:
        """E[M_T | year t] per path; exact at t = T."""
        T = self.inputs.T
        if t == T:
            return self.inputs.market.M[:, T]
        pred = self._basis.predict(self._m_fits[t], self.inputs.market.M[:, t])
        if np.any(pred <= 0.0):
            raise EstimatorError("regressed terminal annuity factor is not positive")
        return pred

    def _projection(self, t: int):
        """Future contributions and wage-index factors seen from year t."""
        if t in self._contrib_cache:
            return self._contrib_cache[t]
        inputs, T = self.inputs, self.inputs.T
        I_t = inputs.inflation.annual_rate(t)
        spread = inputs.scenarios.wage_spread
        wage_growth = 1.0 + I_t + spread
        if np.any(wage_growth <= 0.0):
            raise EstimatorError("expected wage growth must stay positive")
        career = np.asarray(inputs.schedule.career_rate)
        horizon = np.arange(T - t + 1)  # offsets 0..T-t for years t..T
        wage_proj = wage_growth[:, None] ** horizon[None, :]
        career_proj = np.cumprod(np.concatenate(([1.0], 1.0 + career[t + 1 :])))
        s_hat = inputs.salaries[:, t][:, None] * career_proj[None, :] * wage_proj
        f_hat = inputs.franchises[:, t][:, None] * wage_proj
        rates = np.asarray(inputs.schedule.contribution_rate)[t:]
        c_hat = rates[None, :] * np.maximum(s_hat - f_hat, 0.0)
        self._contrib_cache[t] = (s_hat, c_hat)
        return self._contrib_cache[t]

    def wage_denominator(self, t: int) -> np.ndarray:
        """Expected indexed wage sum sum_u s_u prod_{tau>u}(1+pi) seen from t."""
        if t in self._den_cache:
            return self._den_cache[t]
        inputs, T = self.inputs, self.inputs.T
        cum = inputs.inflation.cum[:, : T + 1]
        I_t = inputs.inflation.annual_rate(t)
        s_hat, _ = self._projection(t)
        # projected cumulative inflation: realized through t, flat I_t after
        proj = (1.0 + I_t)[:, None] ** np.arange(T - t + 1)
        cum_hat = np.concatenate((cum[:, :t], cum[:, t][:, None] * proj), axis=1)
        salaries = np.concatenate((inputs.salaries[:, :t], s_hat), axis=1)
        index = cum_hat[:, -1][:, None] / cum_hat
        den = (salaries * index).sum(axis=1)
        if np.any(den <= 0.0):
            raise EstimatorError("expected indexed wage sum must be positive")
        self._den_cache[t] = den
        return den

    def _future_growth(self, t: int, k: int) -> np.ndarray:
        """(1 + r + projected inflation at year k)^(T-k) per path."""
        T = self.inputs.T
        if k == T:
            return np.ones(self.inputs.n_paths)
        base = 1.0 + self.params.r + self.inputs.inflation.projected_rate(t, k)
        if np.any(base <= 0.0):
            raise EstimatorError("projected target growth must stay positive")
        return base ** (T - k)

    # -- headline estimators -----------------------------------------------

    def expected_terminal_wealth(self, wealth_t, t: int) -> np.ndarray:
        """E[W_T | year t]: current wealth compounded plus future inflows.

        Future contributions run through year T-1; year T's own
        contribution is outside the forward sum by convention.
        """
        T = self.inputs.T
        if not 0 <= t <= T:
            raise ParameterError(f"t={t} outside 0..{T}")
        wealth_t = np.asarray(wealth_t, dtype=float)
        base = 1.0 + self.params.r + self.inputs.inflation.annual_rate(t)
        if np.any(base <= 0.0):
            raise EstimatorError("expected growth must stay positive")
        total = wealth_t * base ** (T - t)
        _, c_hat = self._projection(t)
        for k in range(t + 1, T):
            total = total + c_hat[:, k - t] * self._future_growth(t, k)
        return total

    def expected_rr(self, wealth_t, t: int) -> np.ndarray:
        """Expected replacement ratio R_t given wealth at year t."""
        T = self.inputs.T
        w = self.expected_terminal_wealth(wealth_t, t)
        return w / self.expected_market_factor(t) * (T + 1) / self.wage_denominator(t)

    def target_rr(self, t: int) -> np.ndarray:
        """Target replacement ratio R*(t); the annuity factor cancels."""
        T = self.inputs.T
        if not 0 <= t <= T:
            raise ParameterError(f"t={t} outside 0..{T}")
        frame = self.frame
        pension = frame.acc[:, t] * frame.growth_exp[:, t]
        _, c_hat = self._projection(t)
        for k in range(t + 1, T + 1):
            pension = pension + c_hat[:, k - t] * self._future_growth(t, k)
        pension = pension / frame.m_tilde
        return pension * (T + 1) / self.wage_denominator(t)


@dataclass(frozen=True)
class EvaluationReport:
    """One report row: replacement-ratio statistics for one strategy."""

    strategy: str
    mean: float
    median: float
    var5: float
    var10: float
    cvar5: float
    cvar10: float
    shortage: float
    goal_reached: float
    est_err_mean: float
    est_err_std: float

    def csv_row(self) -> str:
        values = [getattr(self, c) for c in REPORT_COLUMNS[1:]]
        return ",".join([self.strategy] + [repr(float(v)) for v in values])


def evaluate_strategy(
    inputs: SimulationInputs,
    strategy,
    params: TargetParams,
    estimation_lag: int = 5,
) -> EvaluationReport:
    """Run ``strategy`` on every path and summarize its replacement ratios.

    ``params`` supplies the target ratio and the required return used by
    the mid-career estimator; the estimation error compares R_{T-lag}
    against the realized terminal ratio.
    """
    T = inputs.T
    outcome = strategy.run(inputs)
    rr = replacement_ratio(
        outcome.terminal_wealth,
        inputs.market.M[:, T],
        inputs.salaries,
        inputs.scenarios.pi[:, : T + 1],
    )
    target = params.target_rr
    estimators = ReplacementEstimators(inputs, params)
    t_est = max(T - estimation_lag, 0)
    expected = estimators.expected_rr(outcome.wealth[:, t_est], t_est)
    diff = expected - rr
    return EvaluationReport(
        strategy=outcome.label,
        mean=float(np.mean(rr)),
        median=float(np.median(rr)),
        var5=var(rr, 0.05),
        var10=var(rr, 0.10),
        cvar5=cvar(rr, 0.05),
        cvar10=cvar(rr, 0.10),
        shortage=float(np.mean(np.maximum(target - rr, 0.0))),
        goal_reached=float(np.mean(rr >= target)),
        est_err_mean=float(np.mean(np.abs(diff))),
        est_err_std=float(np.std(diff, ddof=1)) if diff.size > 1 else 0.0,
    )


@dataclass(frozen=True)
class FrontierRow:
    family: str
    param: float
    shortfall: float
    cvar10: float

    def csv_row(self) -> str:
        return f"{self.family},{self.param!r},{self.shortfall!r},{self.cvar10!r}"


def frontier(
    inputs: SimulationInputs,
    families: dict,
    target_rr: float = 0.70,
    delta: float = 0.025,
    N: int = 20,
) -> list:
    """Mean shortage and 10% CVaR per (family, parameter) combination.

    ``families`` maps a family name (``static``, ``cumulative`` or
    ``individual``) to its parameter grid: mixes for static, required
    returns for the target families.  Rows come back sorted by family
    name, then parameter.
    """
    from .strategies import CumulativeTargetStrategy, IndividualTargetStrategy, StaticMixStrategy

    rows = []
    for family in sorted(families):
        grid = np.sort(np.asarray(families[family], dtype=float))
        if grid.size == 0:
            raise ParameterError(f"empty parameter grid for family {family!r}")
        for param in grid:
            if family == "static":
                strategy = StaticMixStrategy(mix=float(param))
            elif family == "cumulative":
                strategy = CumulativeTargetStrategy(
                    TargetParams(r=float(param), delta=delta, N=N, T=inputs.T, target_rr=target_rr)
                )
            elif family == "individual":
                strategy = IndividualTargetStrategy(
                    TargetParams(r=float(param), delta=delta, N=N, T=inputs.T, target_rr=target_rr)
                )
            else:
                raise ParameterError(f"unknown strategy family {family!r}")
            outcome = strategy.run(inputs)
            rr = replacement_ratio(
                outcome.terminal_wealth,
                inputs.market.M[:, inputs.T],
                inputs.salaries,
                inputs.scenarios.pi[:, : inputs.T + 1],
            )
            rows.append(
                FrontierRow(
                    family=family,
                    param=float(param),
                    shortfall=float(np.mean(np.maximum(target_rr - rr, 0.0))),
                    cvar10=cvar(rr, 0.10),
                )
            )
    return rows
