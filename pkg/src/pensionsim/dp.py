"""Dynamic-programming combination strategy on the wealth-to-target ratio.

The state is Z = W / W-target per contribution tranche, which removes the
tranche size and birth year from the problem: one policy in Z serves every
tranche.  The solver discretizes the control to a small allocation grid and
walks a snake-like pattern through the decision times: solve the last
sub-problem, then repeatedly update future sub-problems backward, solve the
earliest untouched time, and update forward again.  Expected terminal
utility conditional on the current state is estimated cross-sectionally
with local (LOESS) regression of realized terminal utilities on Z.

Terminal utility rewards ending between the configured ratio bounds:

    U(z) = [-(z - beta)^2 - (z - z_min)^2] / z,  beta = sqrt(2 z_max^2 - z_min^2)

whose maximum sits exactly at z_max.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .engine import SimulationInputs
from .errors import DomainError, ParameterError
from .lsmc import ceil_int
from .strategies import StrategyOutcome, TargetFrame, TargetParams

__all__ = [
    "CombinationStrategy",
    "DpConfig",
    "PolicyModel",
    "apply_policy",
    "export_policy_csv",
    "solve_policy",
    "utility_check",
    "z_step",
]


@dataclass(frozen=True)
class DpConfig:
    """Allocation grid, utility bounds and solver knobs."""

    grid: tuple = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    z_min: float = 1.0
    z_max: float = 3.0
    iterations: int = 2
    loess_d: float = 0.2
    loess_degree: int = 1
    curve_points: int = 101

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0:
            raise ParameterError("allocation grid must be non-empty")
        if np.any(g < 0.0) or np.any(g > 1.0):
            raise ParameterError("allocation grid must lie within [0, 1]")
        if np.any(np.diff(g) <= 0.0):
            raise ParameterError("allocation grid must be strictly increasing")
        if not 0.0 < self.z_min < self.z_max:
            raise ParameterError(
                f"need 0 < z_min < z_max, got ({self.z_min}, {self.z_max})"
            )
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.loess_d <= 1.0:
            raise ParameterError(f"loess_d={self.loess_d} outside (0, 1]")
        if self.loess_degree not in (1, 2):
            raise ParameterError(f"loess_degree must be 1 or 2, got {self.loess_degree}")
        if self.curve_points < 2:
            raise ParameterError(f"curve_points must be >= 2, got {self.curve_points}")

    @property
    def beta(self) -> float:
        """Upper reflection point of the terminal utility."""
        return float(np.sqrt(2.0 * self.z_max**2 - self.z_min**2))


def utility_check(z, cfg: DpConfig = DpConfig()):
    """Terminal utility of the wealth-to-target ratio; peaks at z_max."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise DomainError("utility is defined for positive ratios only")
    beta = cfg.beta
    out = (-((z - beta) ** 2) - (z - cfg.z_min) ** 2) / z
    return out if out.ndim else float(out)


def z_step(z, alpha, x, m, expectation_ratio):
    """One-year update of the wealth-to-target ratio.

    The tranche grows at the chosen mix of equity (x) and matching (m)
    returns while its target grows by ``expectation_ratio * (1 + m)``.
    """
    z = np.asarray(z, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(z <= 0.0):
        raise DomainError("ratio must be positive")
    if np.any((alpha < 0.0) | (alpha > 1.0)):
        raise ParameterError("allocation must lie in [0, 1]")
    growth = alpha * (1.0 + np.asarray(x, dtype=float)) + (1.0 - alpha) * (
        1.0 + np.asarray(m, dtype=float)
    )
    denom = np.asarray(expectation_ratio, dtype=float) * (1.0 + np.asarray(m, dtype=float))
    if np.any(denom <= 0.0):
        raise DomainError("target growth denominator must be positive")
    out = z * growth / denom
    return out if out.ndim else float(out)


@dataclass
class _LoessDesign:
    """Design-side factors of a curve fit: everything that depends only on zs.

    Splitting these from the response-side sums lets a solver re-fit the same
    design points against fresh responses without redoing the sort, window
    search, tri-cube weights and normal-equation coefficients.
    """

    nodes: np.ndarray
    mean_only: bool = False
    oidx: np.ndarray | None = None
    w: np.ndarray | None = None
    wx: np.ndarray | None = None
    wx2: np.ndarray | None = None
    nearest: np.ndarray | None = None
    s0: np.ndarray | None = None
    s1: np.ndarray | None = None
    s2: np.ndarray | None = None
    s3: np.ndarray | None = None
    s4: np.ndarray | None = None
    base: np.ndarray | None = None
    ok1: np.ndarray | None = None
    ok2: np.ndarray | None = None
    det1: np.ndarray | None = None
    det2: np.ndarray | None = None
    c22: np.ndarray | None = None
    c12: np.ndarray | None = None
    c11: np.ndarray | None = None
    none_mask: np.ndarray | None = None


def _loess_geometry(zs: np.ndarray, cfg: DpConfig) -> _LoessDesign:
    """Sort, windows, tri-cube weights and moment sums for a LOESS design."""
    n = zs.shape[0]
    z_lo, z_hi = float(zs.min()), float(zs.max())
    if n < 2 or z_lo == z_hi:
        return _LoessDesign(nodes=np.array([z_lo]), mean_only=True)
    nodes = np.linspace(z_lo, z_hi, cfg.curve_points)

    order = np.argsort(zs, kind="stable")
    xs = zs[order]
    k = min(max(ceil_int(cfg.loess_d * n), 1), n)
    if k < n:
        mids = (xs[: n - k] + xs[k:]) / 2.0
        lo = np.searchsorted(mids, nodes, side="left")
        win = k
    else:
        lo = np.zeros(nodes.shape, dtype=int)
        win = n
    idx = lo[:, None] + np.arange(win)
    xw = xs[idx]
    dist = np.abs(xw - nodes[:, None])
    dk = dist.max(axis=1)

    zero_dk = dk == 0.0
    u = dist / np.where(zero_dk, 1.0, dk)[:, None]
    if np.any(zero_dk):
        u[zero_dk] = np.where(dist[zero_dk] == 0.0, 0.0, 2.0)
    w = (1.0 - np.minimum(u, 1.0) ** 3) ** 3

    npos = np.count_nonzero(w > 0.0, axis=1)
    xc = xw - nodes[:, None]
    s0 = w.sum(axis=1)
    wx = w * xc
    s1 = wx.sum(axis=1)
    s2 = (wx * xc).sum(axis=1)

    none_mask = npos == 0
    base = npos >= 1
    want1 = npos >= 2
    det1 = s0 * s2 - s1 * s1
    ok1 = want1 & (det1 > 1e-12 * s0 * s2)
    design = _LoessDesign(
        nodes=nodes,
        oidx=order[idx],
        w=w,
        wx=wx,
        nearest=np.argmin(dist, axis=1),
        s0=s0,
        s1=s1,
        s2=s2,
        base=base,
        ok1=ok1,
        det1=det1,
        none_mask=none_mask,
    )

    if cfg.loess_degree == 2:
        wx2 = wx * xc
        s3 = (wx2 * xc).sum(axis=1)
        s4 = (wx2 * xc * xc).sum(axis=1)
        want2 = npos >= 3
        c22 = s2 * s4 - s3 * s3
        c12 = s1 * s4 - s2 * s3
        c11 = s1 * s3 - s2 * s2
        det2 = s0 * c22 - s1 * c12 + s2 * c11
        design.wx2, design.s3, design.s4 = wx2, s3, s4
        design.ok2 = want2 & (det2 > 1e-10 * s0 * s2 * s4)
        design.det2 = det2
        design.c22, design.c12, design.c11 = c22, c12, c11
    return design


def _loess_apply(design: _LoessDesign, responses: np.ndarray):
    """Fit each response row on a prepared design; returns (nodes, curves)."""
    if design.mean_only:
        return design.nodes, responses.mean(axis=1)[:, None].copy()
    yw = responses[:, design.oidx]
    t0 = np.einsum("mw,kmw->km", design.w, yw)
    t1 = np.einsum("mw,kmw->km", design.wx, yw)

    curves = np.empty((responses.shape[0], design.nodes.shape[0]))
    base, ok1 = design.base, design.ok1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_pred = np.where(base, t0 / np.where(base, design.s0, 1.0), 0.0)
    curves[:, base] = mean_pred[:, base]
    with np.errstate(invalid="ignore", divide="ignore"):
        pred1 = (design.s2 * t0 - design.s1 * t1) / np.where(ok1, design.det1, 1.0)
    curves[:, ok1] = pred1[:, ok1]

    if design.wx2 is not None:
        t2 = np.einsum("mw,kmw->km", design.wx2, yw)
        s1, s2, s3, s4 = design.s1, design.s2, design.s3, design.s4
        ok2 = design.ok2
        with np.errstate(invalid="ignore", divide="ignore"):
            num = t0 * design.c22 - s1 * (t1 * s4 - s3 * t2) + s2 * (t1 * s3 - s2 * t2)
            pred2 = num / np.where(ok2, design.det2, 1.0)
        curves[:, ok2] = pred2[:, ok2]

    if np.any(design.none_mask):
        for i in np.nonzero(design.none_mask)[0]:
            curves[:, i] = yw[:, i, design.nearest[i]]
    return design.nodes, curves


def _fit_curves(zs: np.ndarray, responses: np.ndarray, cfg: DpConfig):
    """LOESS fits of each response row on ``zs``, sampled on a z-node grid.

    Shares the sort, neighbourhood windows and tri-cube weights across all
    response rows; the per-node math matches
    :class:`~pensionsim.lsmc.LoessModel` exactly.
    """
    return _loess_apply(_loess_geometry(zs, cfg), responses)


def _plin_eval(nodes: np.ndarray, curves: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Evaluate each piecewise-linear curve at q with flat extrapolation."""
    j = np.clip(np.searchsorted(nodes, q, side="right"), 1, nodes.shape[0] - 1)
    left = nodes[j - 1]
    t = np.clip((q - left) / (nodes[j] - left), 0.0, 1.0)
    return curves[:, j - 1] * (1.0 - t) + curves[:, j] * t


def _envelope(nodes: np.ndarray, curves: np.ndarray):
    """Upper envelope of fitted curves, reduced to a step policy over z.

    Returns ``(breaks, regions)`` where ``regions[i]`` is the winning grid
    index on the i-th interval of the partition cut at ``breaks`` (flat tails
    included).  Looking a ratio up via ``searchsorted`` then agrees with
    argmax over the interpolated curves everywhere except exactly on a break,
    where the tied neighbours have equal fitted value anyway.
    """
    k, m = curves.shape
    if m == 1 or k == 1:
        return np.empty(0), np.array([int(np.argmax(curves[:, 0]))], dtype=np.int64)
    left, right = curves[:, :-1], curves[:, 1:]
    ia, ib = np.triu_indices(k, 1)
    dl = left[ia] - left[ib]
    dr = right[ia] - right[ib]
    crossing = dl * dr < 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        t = dl / (dl - dr)
    zc = nodes[:-1] + t * np.diff(nodes)
    cand = np.unique(np.concatenate([nodes, zc[crossing]]))
    probes = np.empty(cand.shape[0] + 1)
    probes[1:-1] = (cand[:-1] + cand[1:]) / 2.0
    probes[0] = cand[0] - 1.0
    probes[-1] = cand[-1] + 1.0
    reg = np.argmax(_plin_eval(nodes, curves, probes), axis=0)
    change = reg[1:] != reg[:-1]
    return cand[change], np.concatenate([reg[:1], reg[1:][change]]).astype(np.int64)


def _policy_lookup(breaks: np.ndarray, regions: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Grid indices a step policy picks for ratios z."""
    if breaks.shape[0] == 0:
        return np.full(z.shape, regions[0], dtype=np.int64)
    return regions[np.searchsorted(breaks, z.ravel(), side="right")].reshape(z.shape)


@dataclass
class PolicyModel:
    """Solved policy: sampled expected-utility curves plus in-sample output.

    ``curves[i]`` holds, for decision time ``times[i]``, one expected-utility
    curve per grid allocation sampled on ``z_nodes[i]``; lookups interpolate
    linearly between nodes and extend flat beyond the training range.
    ``decisions[i]`` are the in-sample optimal grid indices per scenario and
    ``z_path`` the in-sample ratios at ``times`` plus the terminal year.
    """

    cfg: DpConfig
    times: np.ndarray
    z_nodes: list
    curves: list
    decisions: np.ndarray
    z_path: np.ndarray
    utility_trace: list = field(default_factory=list)

    @property
    def grid(self) -> np.ndarray:
        return np.asarray(self.cfg.grid, dtype=float)

    def _index(self, t: int) -> int:
        i = int(t) - int(self.times[0])
        if not 0 <= i < len(self.times):
            raise ParameterError(
                f"no decision solved for t={t}; policy covers {self.times[0]}..{self.times[-1]}"
            )
        return i

    def expected_utilities(self, t: int, z) -> np.ndarray:
        """Fitted expected utility per grid allocation, shape (k, len(z))."""
        i = self._index(t)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        nodes, curves = self.z_nodes[i], self.curves[i]
        return np.stack([np.interp(z, nodes, c) for c in curves])

    def alpha_at(self, t: int, z) -> np.ndarray:
        """Optimal grid allocation at time t for ratios z (ties go low)."""
        vals = self.expected_utilities(t, z)
        return self.grid[np.argmax(vals, axis=0)]

    def decision_table(self) -> list:
        """(t, z, alpha) rows sampled on the stored z-node grids."""
        rows = []
        for i, t in enumerate(self.times):
            alpha = self.grid[np.argmax(self.curves[i], axis=0)]
            rows.extend(
                (int(t), float(z), float(a)) for z, a in zip(self.z_nodes[i], alpha)
            )
        return rows

    @property
    def terminal_utility(self) -> np.ndarray:
        return utility_check(self.z_path[-1], self.cfg)


def export_policy_csv(policy: PolicyModel) -> str:
    """Render the sampled decision map as ``t,z,alpha`` CSV text."""
    buf = io.StringIO()
    buf.write("t,z,alpha\n")
    for t, z, a in policy.decision_table():
        buf.write(f"{t},{z!r},{a!r}\n")
    return buf.getvalue()


class _SnakeSolver:
    """Algorithm state for one tranche: factors, decisions and ratios."""

    def __init__(self, z0: np.ndarray, factors: np.ndarray, cfg: DpConfig):
        if np.any(z0 <= 0.0):
            raise DomainError("initial wealth-to-target ratio must be positive")
        if np.any(factors <= 0.0):
            raise DomainError("ratio growth factors must be positive")
        self.cfg = cfg
        self.grid = np.asarray(cfg.grid, dtype=float)
        self.k = self.grid.shape[0]
        # one contiguous (allocation, path) slab per step keeps the per-step
        # gathers in the rollout and propagation cache-friendly
        self.factors = np.ascontiguousarray(factors.transpose(2, 0, 1))
        self.nd = factors.shape[2]
        self.n = z0.shape[0]
        self._paths = np.arange(self.n)
        self.decisions = np.zeros((self.nd, self.n), dtype=np.int64)
        self.z = np.empty((self.nd + 1, self.n))
        self.z[0] = z0
        self.z_nodes = [None] * self.nd
        self.curves = [None] * self.nd
        self.trace: list = []
        # A fit at step s reads the design points z[s] (set by decisions
        # before s) and rolls counterfactuals forward through the fitted
        # step policies after s.  Stamping decision and policy changes
        # with one event clock lets an update be skipped exactly when its
        # inputs are unchanged, i.e. when rerunning it would be a no-op.
        self._stamp = 0
        self._dec_stamp = np.zeros(self.nd, dtype=np.int64)
        self._env_stamp = np.zeros(self.nd, dtype=np.int64)
        self._fitted_at = np.full(self.nd, -1, dtype=np.int64)
        self._env: list = [None] * self.nd
        self._design: list = [None] * self.nd
        self._design_key = np.full(self.nd, -1, dtype=np.int64)
        self._propagate(0)

    def _propagate(self, start: int) -> None:
        for s in range(start, self.nd):
            self.z[s + 1] = self.z[s] * self.factors[s][self.decisions[s], self._paths]

    def _utility(self, z: np.ndarray) -> np.ndarray:
        beta = self.cfg.beta
        return (-((z - beta) ** 2) - (z - self.cfg.z_min) ** 2) / z

    def _stale(self, s: int) -> bool:
        fitted = self._fitted_at[s]
        if fitted < 0:
            return True
        if s > 0 and self._dec_stamp[:s].max() > fitted:
            return True
        return s + 1 < self.nd and self._env_stamp[s + 1 :].max() > fitted

    def _refresh(self, s: int) -> None:
        """Re-fit the expected-utility curves at time index s and re-decide.

        The counterfactual rollout forces each grid allocation at s and then
        follows the current fitted policies at the counterfactual states, so
        the regression responses value each choice under state-feedback
        control rather than under the scenario's incumbent decision sequence.
        """
        if not self._stale(s):
            return
        zk = self.z[s][None, :] * self.factors[s]
        for t in range(s + 1, self.nd):
            breaks, regions = self._env[t]
            fac = self.factors[t]
            nb = breaks.shape[0]
            if nb == 0:
                np.multiply(zk, fac[regions[0]][None, :], out=zk)
            else:
                if nb <= 8:
                    # a handful of comparisons beats a binary search here
                    idx = (zk >= breaks[0]).astype(np.intp)
                    for b in breaks[1:]:
                        idx += zk >= b
                else:
                    idx = np.searchsorted(breaks, zk.ravel(), side="right").reshape(
                        zk.shape
                    )
                np.multiply(zk, fac[regions[idx], self._paths[None, :]], out=zk)
        u = self._utility(zk)
        key = int(self._dec_stamp[:s].max()) if s > 0 else 0
        if self._design_key[s] != key:
            self._design[s] = _loess_geometry(self.z[s], self.cfg)
            self._design_key[s] = key
        nodes, curves = _loess_apply(self._design[s], u)
        self.z_nodes[s] = nodes
        self.curves[s] = curves
        env = _envelope(nodes, curves)
        old = self._env[s]
        if old is None or not (
            np.array_equal(env[0], old[0]) and np.array_equal(env[1], old[1])
        ):
            self._env[s] = env
            self._stamp += 1
            self._env_stamp[s] = self._stamp
        new = _policy_lookup(*self._env[s], self.z[s])
        if not np.array_equal(new, self.decisions[s]):
            self.decisions[s] = new
            self._stamp += 1
            self._dec_stamp[s] = self._stamp
            self._propagate(s)
        self._fitted_at[s] = self._stamp

    def solve(self) -> None:
        last = self.nd - 1
        for _ in range(self.cfg.iterations):
            self._refresh(last)
            for i in range(self.nd - 2, -1, -1):
                for tb in range(last, i, -1):
                    self._refresh(tb)
                self._refresh(i)
                for tf in range(i + 1, last + 1):
                    self._refresh(tf)
            self.trace.append(float(self._utility(self.z[self.nd]).mean()))


def _step_factors(inputs: SimulationInputs, frame: TargetFrame, cfg: DpConfig) -> np.ndarray:
    """Per (allocation, path, year) growth factor of the ratio Z.

    Column t holds the factor over (t-1, t]; column 0 is unused padding.
    """
    grid = np.asarray(cfg.grid, dtype=float)[:, None, None]
    x = inputs.scenarios.x[:, : inputs.T + 1][None, :, :]
    m = inputs.market.m[None, :, :]
    er = frame.er[None, :, :]
    with np.errstate(invalid="ignore"):
        factors = (grid * (1.0 + x) + (1.0 - grid) * (1.0 + m)) / (er * (1.0 + m))
    factors[:, :, 0] = 1.0
    if np.any(factors <= 0.0) or not np.all(np.isfinite(factors)):
        raise DomainError("ratio growth factors must be positive and finite")
    return factors


def solve_policy(
    inputs: SimulationInputs,
    frame: TargetFrame,
    cfg: DpConfig = DpConfig(),
    tau: int = 0,
    factors: np.ndarray | None = None,
) -> PolicyModel:
    """Solve the snake-pattern program for the tranche born in year ``tau``."""
    T = inputs.T
    if not 0 <= tau <= T - 1:
        raise ParameterError(f"tranche birth year {tau} leaves no decision before T={T}")
    if factors is None:
        factors = _step_factors(inputs, frame, cfg)
    solver = _SnakeSolver(frame.z0(tau), factors[:, :, tau + 1 : T + 1], cfg)
    solver.solve()
    return PolicyModel(
        cfg=cfg,
        times=np.arange(tau, T),
        z_nodes=solver.z_nodes,
        curves=solver.curves,
        decisions=solver.decisions,
        z_path=solver.z,
        utility_trace=solver.trace,
    )


def apply_policy(policy: PolicyModel, ledger, targets, t: int):
    """Per-tranche allocations from the policy plus the aggregate fraction.

    ``targets`` holds one positive wealth target per ledger tranche; the
    policy is evaluated at each tranche's ratio Z = wealth / target.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.shape != ledger.wealth.shape:
        raise ParameterError(
            f"need one target per tranche, got {targets.shape} for {ledger.wealth.shape}"
        )
    if np.any(targets <= 0.0):
        raise DomainError("tranche targets must be positive")
    alphas = policy.alpha_at(t, ledger.wealth / targets)
    total = ledger.wealth.sum()
    aggregate = float(ledger.wealth @ alphas / total) if total > 0 else float(alphas[-1])
    return alphas, aggregate


@dataclass(frozen=True)
class CombinationStrategy:
    """Applies dynamic-programming policies to every contribution tranche.

    ``per-contribution`` mode re-solves the program for each tranche and
    uses its in-sample decisions; ``shared`` mode solves once for the first
    tranche and evaluates that policy's curves at every tranche's ratio.
    """

    params: TargetParams
    cfg: DpConfig = DpConfig()
    mode: str = "per-contribution"
    label: str = "combination"

    def __post_init__(self) -> None:
        if self.mode not in ("per-contribution", "shared"):
            raise ParameterError(f"unknown combination mode {self.mode!r}")

    def run(self, inputs: SimulationInputs) -> StrategyOutcome:
        frame = TargetFrame.build(inputs, self.params)
        T, n = inputs.T, inputs.n_paths
        x, m, c = inputs.scenarios.x, inputs.market.m, inputs.contributions
        factors = _step_factors(inputs, frame, self.cfg)
        grid = np.asarray(self.cfg.grid, dtype=float)

        # allocation of the tranche born at tau, decided at time t:
        # tranche_alpha[:, t, tau]; NaN before birth, zero at conversion
        tranche_alpha = np.full((n, T + 1, T + 1), np.nan)
        if self.mode == "per-contribution":
            for tau in range(T):
                policy = solve_policy(inputs, frame, self.cfg, tau=tau, factors=factors)
                tranche_alpha[:, tau:T, tau] = grid[policy.decisions].T
        else:
            policy = solve_policy(inputs, frame, self.cfg, tau=0, factors=factors)
            for tau in range(T):
                z = frame.z0(tau)
                for t in range(tau, T):
                    a = policy.alpha_at(t, z)
                    tranche_alpha[:, t, tau] = a
                    growth = a * (1.0 + x[:, t + 1]) + (1.0 - a) * (1.0 + m[:, t + 1])
                    z = z * growth / (frame.er[:, t + 1] * (1.0 + m[:, t + 1]))
        tranche_alpha[:, T, :] = 0.0

        tranche_wealth = np.zeros((n, T + 1))
        wealth = np.empty((n, T + 1))
        alpha = np.empty((n, T + 1))
        for t in range(T + 1):
            if t > 0:
                live = tranche_alpha[:, t - 1, :t]
                tranche_wealth[:, :t] *= live * (1.0 + x[:, t, None]) + (1.0 - live) * (
                    1.0 + m[:, t, None]
                )
            tranche_wealth[:, t] = c[:, t]
            wealth[:, t] = tranche_wealth[:, : t + 1].sum(axis=1)
            weighted = (tranche_wealth[:, : t + 1] * tranche_alpha[:, t, : t + 1]).sum(axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                alpha[:, t] = np.where(wealth[:, t] > 0, weighted / wealth[:, t], 0.0)
        return StrategyOutcome(
            label=self.label, wealth=wealth, alpha=alpha, tranche_alpha=tranche_alpha
        )
