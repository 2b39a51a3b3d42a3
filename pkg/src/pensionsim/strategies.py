"""Allocation rules: static mixes, glide paths and the target strategies.

All rules decide the equity fraction alpha_t each year; the complement sits
in the inflation-matching portfolio.  The two target strategies compare
wealth against a target funded by compounding contributions at a required
real rate r on top of (realized, then expected) inflation:

    E_t F_tau = prod_{k=tau+1..t} (1 + r + pi_k) * (1 + r + I_t)^(T-t)

The cumulative strategy tracks one aggregate target; the individual
strategy tracks one target per contribution tranche, switching a tranche
into the matching portfolio permanently once its target has been reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .career import WealthLedger
from .engine import SimulationInputs
from .errors import DomainError, ParameterError, ScheduleError
from .market import post_retirement_factor

__all__ = [
    "CumulativeTargetStrategy",
    "GlidePath",
    "IndividualTargetStrategy",
    "StaticMixStrategy",
    "StrategyOutcome",
    "TargetFrame",
    "TargetParams",
    "cumulative_step",
    "cumulative_target",
    "individual_step",
    "optimize_static_mix",
    "static_step",
    "target_wealth_factor",
]


@dataclass(frozen=True)
class TargetParams:
    """Required real return and annuity assumptions behind wealth targets."""

    r: float
    delta: float = 0.025
    N: int = 20
    T: int = 41
    target_rr: float = 0.70

    def __post_init__(self) -> None:
        if not np.isfinite(self.r) or self.r <= -1.0:
            raise ParameterError(f"required return r={self.r} must be finite and > -1")
        if not np.isfinite(self.delta) or self.delta <= -1.0:
            raise ParameterError(f"discount rate delta={self.delta} must exceed -1")
        if self.N < 1 or self.T < 1:
            raise ParameterError(f"N={self.N} and T={self.T} must be >= 1")
        if not 0.0 < self.target_rr < 2.0:
            raise ParameterError(f"target replacement ratio {self.target_rr} not in (0, 2)")

    @property
    def m_tilde(self) -> float:
        """Deterministic post-retirement annuity factor."""
        return post_retirement_factor(self.delta, self.N)


@dataclass(frozen=True)
class GlidePath:
    """Deterministic per-age equity fraction."""

    ages: tuple
    fraction: tuple

    def __post_init__(self) -> None:
        if len(self.ages) != len(self.fraction) or not self.ages:
            raise ScheduleError("glide path needs one fraction per age")
        expected = tuple(range(self.ages[0], self.ages[0] + len(self.ages)))
        if tuple(self.ages) != expected:
            raise ScheduleError("glide path ages must be consecutive integers")
        for f in self.fraction:
            if not np.isfinite(f) or not 0.0 <= f <= 1.0:
                raise ScheduleError(f"glide fraction {f} not in [0, 1]")

    @classmethod
    def bogle(cls, ages=tuple(range(25, 67))) -> "GlidePath":
        """Hold (100 - age)% in equity, clamped to [0, 1]."""
        frac = tuple(min(max((100 - a) / 100.0, 0.0), 1.0) for a in ages)
        return cls(ages=tuple(ages), fraction=frac)

    @classmethod
    def linear_to(cls, end: float, ages=tuple(range(25, 67)), start: float = 1.0) -> "GlidePath":
        """Equity fraction moving linearly from ``start`` to ``end`` over ``ages``."""
        frac = np.clip(np.linspace(start, end, len(ages)), 0.0, 1.0)
        return cls(ages=tuple(ages), fraction=tuple(float(f) for f in frac))

    def fraction_at(self, age: int) -> float:
        if not self.ages[0] <= age <= self.ages[-1]:
            raise ScheduleError(f"age {age} outside glide path {self.ages[0]}..{self.ages[-1]}")
        return self.fraction[age - self.ages[0]]


def static_step(mix_or_glide, age: int) -> float:
    """Scheduled equity fraction for this age (constant mix or glide path)."""
    if isinstance(mix_or_glide, GlidePath):
        return mix_or_glide.fraction_at(age)
    mix = float(mix_or_glide)
    if not np.isfinite(mix) or not 0.0 <= mix <= 1.0:
        raise ParameterError(f"static mix {mix} not in [0, 1]")
    return mix


def target_wealth_factor(pi, tau: int, t: int, params: TargetParams, expected_rate: float) -> float:
    """Compounding factor E_t F_tau of one contribution toward the target.

    Realized inflation ``pi`` (a single path) is used between tau and t,
    the current expected rate beyond t.
    """
    if not 0 <= tau <= t <= params.T:
        raise ParameterError(f"need 0 <= tau <= t <= T, got tau={tau}, t={t}, T={params.T}")
    pi = np.asarray(pi, dtype=float)
    realized = 1.0 + params.r + pi[tau + 1 : t + 1]
    future = 1.0 + params.r + expected_rate
    if np.any(realized <= 0.0) or future <= 0.0:
        raise DomainError("target growth factor 1 + r + inflation must stay positive")
    return float(np.prod(realized) * future ** (params.T - t))


def cumulative_target(
    pi,
    contributions,
    t: int,
    params: TargetParams,
    M_t: float,
    m_tilde: float,
    expected_rate: float,
) -> float:
    """Aggregate wealth target (M_t / M~_T) * sum_tau c_tau * E_t F_tau."""
    if m_tilde <= 0.0:
        raise DomainError(f"post-retirement factor must be positive, got {m_tilde}")
    c = np.asarray(contributions, dtype=float)
    if c.shape[0] < t + 1:
        raise ParameterError(f"need contributions c_0..c_{t}, got {c.shape[0]}")
    total = sum(
        c[tau] * target_wealth_factor(pi, tau, t, params, expected_rate) for tau in range(t + 1)
    )
    return M_t / m_tilde * total


@dataclass
class TargetFrame:
    """All target-wealth panels for one scenario set and one ``TargetParams``.

    ``cumq[:, t]`` compounds 1 + r + pi through year t, ``growth_exp[:, t]``
    is the expected factor (1 + r + I_t)^(T-t), ``acc`` accumulates
    contributions at realized 1 + r + pi, and ``er[:, t]`` is the one-year
    growth of any tranche target excluding the annuity-factor move.
    """

    params: TargetParams
    m_tilde: float
    M: np.ndarray
    cumq: np.ndarray
    growth_exp: np.ndarray
    er: np.ndarray
    acc: np.ndarray
    target_cum: np.ndarray
    contributions: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, inputs: SimulationInputs, params: TargetParams) -> "TargetFrame":
        if params.T != inputs.T:
            raise ParameterError(
                f"params.T={params.T} does not match prepared horizon {inputs.T}"
            )
        T = params.T
        pi = inputs.scenarios.pi[:, : T + 1]
        q = 1.0 + params.r + pi
        if np.any(q[:, 1:] <= 0.0):
            raise DomainError("1 + r + realized inflation must stay positive")
        cumq = np.ones_like(q)
        np.cumprod(q[:, 1:], axis=1, out=cumq[:, 1:])
        base = 1.0 + params.r + inputs.inflation.rates[:, : T + 1]
        if np.any(base <= 0.0):
            raise DomainError("1 + r + expected inflation must stay positive")
        growth_exp = base ** np.arange(T, -1, -1)
        er = np.empty_like(q)
        er[:, 0] = np.nan
        er[:, 1:] = q[:, 1:] * growth_exp[:, 1:] / growth_exp[:, :-1]
        c = inputs.contributions
        acc = np.empty_like(c)
        acc[:, 0] = c[:, 0]
        for t in range(1, T + 1):
            acc[:, t] = acc[:, t - 1] * q[:, t] + c[:, t]
        m_tilde = params.m_tilde
        M = inputs.market.M
        target_cum = M * acc * growth_exp / m_tilde
        return cls(
            params=params,
            m_tilde=m_tilde,
            M=M,
            cumq=cumq,
            growth_exp=growth_exp,
            er=er,
            acc=acc,
            target_cum=target_cum,
            contributions=c,
        )

    def factor(self, tau: int, t: int) -> np.ndarray:
        """E_t F_tau per path."""
        return self.cumq[:, t] / self.cumq[:, tau] * self.growth_exp[:, t]

    def tranche_targets(self, t: int) -> np.ndarray:
        """Targets of all tranches born up to t, shape (n_paths, t + 1)."""
        scale = self.M[:, t] * self.growth_exp[:, t] / self.m_tilde
        ratios = self.cumq[:, t][:, None] / self.cumq[:, : t + 1]
        return scale[:, None] * self.contributions[:, : t + 1] * ratios

    def z0(self, tau: int) -> np.ndarray:
        """Initial wealth-to-target ratio of a tranche born at tau."""
        return self.m_tilde / (self.M[:, tau] * self.growth_exp[:, tau])


def cumulative_step(wealth, target, alpha_prev, x, m, t: int):
    """Equity fraction of the cumulative strategy at time t.

    Zero once wealth covers the target; otherwise full equity at t = 0 and
    afterwards the buy-and-hold drift of last year's mix.
    """
    wealth = np.asarray(wealth, dtype=float)
    target = np.asarray(target, dtype=float)
    if t == 0:
        return np.where(wealth >= target, 0.0, 1.0)
    alpha_prev = np.asarray(alpha_prev, dtype=float)
    if np.any((alpha_prev < 0.0) | (alpha_prev > 1.0)):
        raise ParameterError("previous allocation must lie in [0, 1]")
    risky = alpha_prev * (1.0 + np.asarray(x, dtype=float))
    total = risky + (1.0 - alpha_prev) * (1.0 + np.asarray(m, dtype=float))
    if np.any(total <= 0.0):
        raise DomainError("portfolio wiped out: drift denominator is not positive")
    return np.where(wealth >= target, 0.0, risky / total)


def individual_step(ledger: WealthLedger, targets, t: int):
    """Advance the per-tranche rule: absorb tranches at/above their target.

    Returns the updated ledger (new allocation and absorption flags) and
    the wealth-weighted aggregate equity fraction.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.shape != ledger.wealth.shape:
        raise ParameterError(
            f"need one target per tranche, got {targets.shape} for {ledger.wealth.shape}"
        )
    absorbed = ledger.absorbed | (ledger.wealth >= targets)
    allocation = np.where(absorbed, 0.0, 1.0)
    updated = WealthLedger(
        year=ledger.year,
        tau=ledger.tau,
        amounts=ledger.amounts,
        wealth=ledger.wealth,
        allocation=allocation,
        absorbed=absorbed,
    )
    return updated, updated.aggregate_allocation()


@dataclass
class StrategyOutcome:
    """Wealth and allocation panels produced by one strategy run.

    ``wealth[:, t]`` includes the year-t contribution (decision-time
    wealth); ``alpha[:, t]`` is the fraction chosen at t for the year
    ahead.  ``tranche_alpha[p, t, tau]`` (when tracked) is the allocation
    of the tranche born at tau, NaN before its birth.
    """

    label: str
    wealth: np.ndarray
    alpha: np.ndarray
    tranche_alpha: np.ndarray | None = None

    @property
    def terminal_wealth(self) -> np.ndarray:
        return self.wealth[:, -1]


def _grown(wealth, alpha, x_t, m_t):
    return wealth * (alpha * (1.0 + x_t) + (1.0 - alpha) * (1.0 + m_t))


@dataclass(frozen=True)
class StaticMixStrategy:
    """Annual rebalancing to a constant mix or a deterministic glide path."""

    mix: object
    label: str = ""

    def __post_init__(self) -> None:
        if not self.label:
            name = (
                "glide"
                if isinstance(self.mix, GlidePath)
                else f"static_{100.0 * float(self.mix):g}"
            )
            object.__setattr__(self, "label", name)

    def run(self, inputs: SimulationInputs) -> StrategyOutcome:
        T, n = inputs.T, inputs.n_paths
        x, m, c = inputs.scenarios.x, inputs.market.m, inputs.contributions
        ages = inputs.schedule.ages
        wealth = np.empty((n, T + 1))
        alpha = np.empty((n, T + 1))
        wealth[:, 0] = c[:, 0]
        alpha[:, 0] = static_step(self.mix, ages[0])
        for t in range(1, T + 1):
            wealth[:, t] = _grown(wealth[:, t - 1], alpha[:, t - 1], x[:, t], m[:, t]) + c[:, t]
            alpha[:, t] = static_step(self.mix, ages[t])
        return StrategyOutcome(label=self.label, wealth=wealth, alpha=alpha)


@dataclass(frozen=True)
class CumulativeTargetStrategy:
    """Full equity until aggregate wealth reaches the aggregate target."""

    params: TargetParams
    label: str = "cumulative"

    def run(self, inputs: SimulationInputs) -> StrategyOutcome:
        frame = TargetFrame.build(inputs, self.params)
        T, n = inputs.T, inputs.n_paths
        x, m, c = inputs.scenarios.x, inputs.market.m, inputs.contributions
        wealth = np.empty((n, T + 1))
        alpha = np.empty((n, T + 1))
        wealth[:, 0] = c[:, 0]
        alpha[:, 0] = cumulative_step(wealth[:, 0], frame.target_cum[:, 0], None, None, None, 0)
        for t in range(1, T + 1):
            wealth[:, t] = _grown(wealth[:, t - 1], alpha[:, t - 1], x[:, t], m[:, t]) + c[:, t]
            alpha[:, t] = cumulative_step(
                wealth[:, t], frame.target_cum[:, t], alpha[:, t - 1], x[:, t], m[:, t], t
            )
        return StrategyOutcome(label=self.label, wealth=wealth, alpha=alpha)


@dataclass(frozen=True)
class IndividualTargetStrategy:
    """Per-tranche targets with an absorbing switch into matching."""

    params: TargetParams
    label: str = "individual"

    def run(self, inputs: SimulationInputs) -> StrategyOutcome:
        frame = TargetFrame.build(inputs, self.params)
        T, n = inputs.T, inputs.n_paths
        x, m, c = inputs.scenarios.x, inputs.market.m, inputs.contributions
        tranche_wealth = np.zeros((n, T + 1))
        absorbed = np.zeros((n, T + 1), dtype=bool)
        tranche_alpha = np.full((n, T + 1, T + 1), np.nan)
        wealth = np.empty((n, T + 1))
        alpha = np.empty((n, T + 1))
        for t in range(T + 1):
            if t > 0:
                live = tranche_alpha[:, t - 1, :t]
                tranche_wealth[:, :t] = _grown(
                    tranche_wealth[:, :t], live, x[:, t, None], m[:, t, None]
                )
            tranche_wealth[:, t] = c[:, t]
            absorbed[:, : t + 1] |= tranche_wealth[:, : t + 1] >= frame.tranche_targets(t)
            tranche_alpha[:, t, : t + 1] = np.where(absorbed[:, : t + 1], 0.0, 1.0)
            wealth[:, t] = tranche_wealth[:, : t + 1].sum(axis=1)
            weighted = (tranche_wealth[:, : t + 1] * tranche_alpha[:, t, : t + 1]).sum(axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                alpha[:, t] = np.where(wealth[:, t] > 0, weighted / wealth[:, t], 1.0)
        return StrategyOutcome(
            label=self.label, wealth=wealth, alpha=alpha, tranche_alpha=tranche_alpha
        )


def optimize_static_mix(inputs: SimulationInputs, grid, target_rr: float = 0.70) -> float:
    """Grid point minimizing mean shortfall; ties go to the smaller mix."""
    from .metrics import replacement_ratio, shortfall

    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("static mix grid must be non-empty")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ParameterError("static mix grid must lie within [0, 1]")
    # one batched accumulation over all candidate mixes at once
    T = inputs.T
    x, m, c = inputs.scenarios.x, inputs.market.m, inputs.contributions
    mixes = grid[:, None]
    wealth = np.broadcast_to(c[:, 0], (grid.size, inputs.n_paths)).copy()
    for t in range(1, T + 1):
        wealth = _grown(wealth, mixes, x[:, t], m[:, t]) + c[:, t]
    scores = np.empty(grid.size)
    for i in range(grid.size):
        rr = replacement_ratio(
            wealth[i],
            inputs.market.M[:, -1],
            inputs.salaries,
            inputs.scenarios.pi[:, : inputs.T + 1],
        )
        scores[i] = float(np.mean(shortfall(rr, target_rr)))
    return float(grid[int(np.argmax(scores))])
