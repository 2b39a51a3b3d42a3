"""Cross-sectional conditional-expectation estimators.

Three tools, all operating across simulated scenarios rather than through
nested simulation:

* :func:`regress_now` — global least squares of realized future payoffs on
  functions of the current state (the classic simulation-regression step).
* :class:`LoessModel` / :func:`loess_eval` — local weighted polynomial
  regression with tri-cube weights over the ``k = ceil(d*n)`` nearest
  neighbours of the query point.
* :func:`expected_inflation` — the cumulative-inflation cross-sectional
  regression that converts realized inflation into a per-path annual
  expected-inflation rate, plus :class:`InflationEstimator`, the full
  per-(path, year) table of those rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "BasisSpec",
    "regress_now",
    "tricube_weight",
    "LoessModel",
    "loess_eval",
    "loess_batch",
    "InflationFit",
    "InflationEstimator",
    "expected_inflation",
]


def ceil_int(value: float) -> int:
    """ceil() that forgives binary float fuzz on mathematically integral inputs.

    0.2 * 2000 evaluates to 400.00000000000006; the intended count is 400,
    not 401.  Rounding to 9 decimals first removes that artifact while leaving
    genuinely fractional products untouched.
    """
    return int(math.ceil(round(value, 9)))


# ---------------------------------------------------------------------------
# Global regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisSpec:
    """Ordered basis functions for the global regression."""

    functions: tuple
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.functions) < 1:
            raise ParameterError("basis needs at least one function")

    @staticmethod
    def linear() -> "BasisSpec":
        """The {1, x} basis used for the inflation and market-factor fits."""
        return BasisSpec((lambda z: np.ones_like(z), lambda z: z), ("1", "x"))

    def design(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = []
        for f in self.functions:
            v = np.asarray(f(x), dtype=float)
            cols.append(np.broadcast_to(v, x.shape) if v.shape != x.shape else v)
        return np.column_stack(cols)

    def predict(self, coef: np.ndarray, x) -> np.ndarray:
        scalar = np.isscalar(x)
        out = self.design(np.atleast_1d(np.asarray(x, dtype=float))) @ coef
        return float(out[0]) if scalar else out


def _independent_columns(a: np.ndarray) -> list[int]:
    keep: list[int] = []
    for j in range(a.shape[1]):
        if np.linalg.matrix_rank(a[:, keep + [j]]) == len(keep) + 1:
            keep.append(j)
    return keep


def regress_now(x, y, basis: BasisSpec | None = None) -> np.ndarray:
    """Least-squares coefficients of y on basis functions of x.

    The predictor is ``x -> sum_j coef[j] * phi_j(x)``.  A rank-deficient
    design never raises: collinear columns are dropped (earliest independent
    columns kept) and their coefficients reported as zero.
    """
    basis = basis if basis is not None else BasisSpec.linear()
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ParameterError(f"sample size mismatch: {x.shape} vs {y.shape}")
    design = basis.design(x)
    if len(x) < design.shape[1]:
        raise ParameterError(
            f"need at least {design.shape[1]} samples, got {len(x)}"
        )
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        keep = _independent_columns(design)
        reduced, *_ = np.linalg.lstsq(design[:, keep], y, rcond=None)
        coef = np.zeros(design.shape[1])
        coef[keep] = reduced
    return coef


# ---------------------------------------------------------------------------
# Local regression
# ---------------------------------------------------------------------------


def tricube_weight(u):
    """Tri-cube kernel: (1-u^3)^3 on [0, 1), zero on [1, inf)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise DomainError("tri-cube weight is defined for u >= 0 only")
    clipped = np.minimum(arr, 1.0)
    w = (1.0 - clipped**3) ** 3
    return w if isinstance(u, np.ndarray) else float(w)


class LoessModel:
    """Training sample plus neighbourhood configuration for local regression.

    Parameters
    ----------
    x, y : arrays of equal length n >= degree + 1.
    d : neighbourhood share in (0, 1]; k = ceil(d * n) points receive
        non-trivial weight at each query.
    degree : local polynomial degree, 1 or 2.
    """

    def __init__(self, x, y, d: float = 0.2, degree: int = 1):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ParameterError("x and y must have equal length")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ParameterError("training data must be finite")
        if not 0.0 < d <= 1.0:
            raise ParameterError(f"neighbourhood parameter d={d} outside (0, 1]")
        if degree not in (1, 2):
            raise ParameterError(f"degree must be 1 or 2, got {degree}")
        if len(x) < degree + 1:
            raise ParameterError(f"need at least degree+1={degree + 1} points")
        self.d = float(d)
        self.degree = int(degree)
        self.n = len(x)
        self.k = min(max(ceil_int(self.d * self.n), 1), self.n)
        order = np.argsort(x, kind="stable")
        self._xs = x[order]
        self._ys = y[order]
        self._distinct = int(np.count_nonzero(np.diff(self._xs)) + 1)
        # window-start boundaries: query above (xs[s] + xs[s+k])/2 shifts the
        # k-nearest window from start s to s+1
        if self.k < self.n:
            self._mids = (self._xs[: self.n - self.k] + self._xs[self.k :]) / 2.0
        else:
            self._mids = np.empty(0)

    # internal: evaluate the fitted local polynomial at each query point
    def _evaluate(self, queries: np.ndarray) -> np.ndarray:
        q = np.asarray(queries, dtype=float).ravel()
        if q.size == 0:
            return np.empty(0)
        if not np.all(np.isfinite(q)):
            raise DomainError("query points must be finite")
        if self._distinct < 2:
            # one distinct training abscissa: every fit degenerates to the mean
            return np.full(q.shape, float(self._ys.mean()))

        xs, ys = self._xs, self._ys
        if self.k >= self.n:
            lo = np.zeros(q.shape, dtype=int)
            win = self.n
        else:
            lo = np.searchsorted(self._mids, q, side="left")
            win = self.k
        idx = lo[:, None] + np.arange(win)
        xw = xs[idx]
        yw = ys[idx]
        dist = np.abs(xw - q[:, None])
        dk = dist.max(axis=1)

        zero_dk = dk == 0.0
        u = dist / np.where(zero_dk, 1.0, dk)[:, None]
        if np.any(zero_dk):
            # the k nearest points all coincide with the query: weight exact
            # matches only (their tri-cube argument is 0/0)
            u[zero_dk] = np.where(dist[zero_dk] == 0.0, 0.0, 2.0)
        w = (1.0 - np.minimum(u, 1.0) ** 3) ** 3

        npos = np.count_nonzero(w > 0.0, axis=1)
        xc = xw - q[:, None]
        s0 = w.sum(axis=1)
        t0 = (w * yw).sum(axis=1)
        wx = w * xc
        s1 = wx.sum(axis=1)
        s2 = (wx * xc).sum(axis=1)
        t1 = (wx * yw).sum(axis=1)

        out = np.empty(q.shape)
        none_mask = npos == 0
        base = npos >= 1
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_pred = np.where(base, t0 / np.where(base, s0, 1.0), 0.0)
        out[base] = mean_pred[base]

        want1 = npos >= 2  # at least degree-1 worth of support
        det1 = s0 * s2 - s1 * s1
        ok1 = want1 & (det1 > 1e-12 * s0 * s2)
        with np.errstate(invalid="ignore", divide="ignore"):
            pred1 = (s2 * t0 - s1 * t1) / np.where(ok1, det1, 1.0)
        out[ok1] = pred1[ok1]

        if self.degree == 2:
            wx2 = wx * xc
            s3 = (wx2 * xc).sum(axis=1)
            s4 = (wx2 * xc * xc).sum(axis=1)
            t2 = (wx2 * yw).sum(axis=1)
            want2 = npos >= 3
            c22 = s2 * s4 - s3 * s3
            c12 = s1 * s4 - s2 * s3
            c11 = s1 * s3 - s2 * s2
            det2 = s0 * c22 - s1 * c12 + s2 * c11
            ok2 = want2 & (det2 > 1e-10 * s0 * s2 * s4)
            with np.errstate(invalid="ignore", divide="ignore"):
                num = t0 * c22 - s1 * (t1 * s4 - s3 * t2) + s2 * (t1 * s3 - s2 * t2)
                pred2 = num / np.where(ok2, det2, 1.0)
            out[ok2] = pred2[ok2]

        if np.any(none_mask):
            # all tri-cube weights vanished (every neighbour sits exactly at
            # the cutoff distance): fall back to the nearest training value,
            # lowest x first on ties
            for i in np.nonzero(none_mask)[0]:
                out[i] = yw[i, int(np.argmin(dist[i]))]
        return out


def loess_batch(model: LoessModel, queries) -> np.ndarray:
    """Vectorized :func:`loess_eval` over an array of query points."""
    return model._evaluate(np.asarray(queries, dtype=float))


def loess_eval(model: LoessModel, x: float) -> float:
    """Local weighted polynomial fit evaluated at the single point x.

    Weights are ``T(dist_i / dist_(k))`` over *all* training points (zero at
    and beyond the k-th nearest distance).  Degenerate neighbourhoods degrade
    gracefully: fewer than degree+1 positively weighted points (or a
    numerically singular local design, e.g. duplicate x values) reduce the
    degree down to a weighted mean, and a query whose neighbours all sit at
    the exact cutoff distance returns the nearest training value.
    """
    return float(model._evaluate(np.array([x], dtype=float))[0])


# ---------------------------------------------------------------------------
# Expected inflation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InflationFit:
    """Cross-sectional inflation regression at one observation year."""

    xi1: float
    xi2: float
    rates: np.ndarray  # per-path annual expected inflation


def _cumulative_inflation(pi: np.ndarray) -> np.ndarray:
    """cum[:, t] = prod_{k=1..t} (1 + pi_k); year-0 inflation is not compounded."""
    growth = 1.0 + pi.copy()
    growth[:, 0] = 1.0
    return np.cumprod(growth, axis=1)


def _annualize(levels: np.ndarray, order: int, floor: float) -> np.ndarray:
    """Root the fitted cumulative level to an annual rate.

    ``order`` is the printed root order (one less than the number of
    compounded years); the single-period case returns the level directly.
    The floor keeps the level positive before the fractional root — and in
    the single-period case it keeps 1 + I positive.
    """
    lv = np.maximum(levels, floor)
    if order == 0:
        return lv - 1.0
    return lv ** (1.0 / order) - 1.0


def expected_inflation(scenarios, t: int, T: int, floor: float = 0.5) -> InflationFit:
    """Expected effective annual inflation over [t, T], per path.

    Cross-sectional regression of future cumulative inflation
    ``y = prod_{k=t+1..T}(1+pi_k)`` on realized cumulative inflation
    ``x = prod_{k=1..t}(1+pi_k)`` (x = 1 at t=0); the fitted level
    ``xi1*x + xi2`` is floored and rooted with order ``T - (t+1)``.  A
    constant regressor (e.g. t = 0) engages the intercept-only fit, i.e. the
    cross-sectional mean of y.
    """
    if not 0 <= t < T:
        raise DomainError(f"need 0 <= t < T, got t={t}, T={T}")
    if T > scenarios.horizon:
        raise DomainError(f"T={T} exceeds scenario horizon {scenarios.horizon}")
    cum = _cumulative_inflation(scenarios.pi)
    xi1, xi2, rates = _fit_single_year(cum, t, T, floor)
    return InflationFit(xi1=xi1, xi2=xi2, rates=rates)


def _fit_single_year(cum: np.ndarray, t: int, T: int, floor: float):
    x = cum[:, t]
    y = cum[:, T] / cum[:, t]
    if np.ptp(x) == 0.0:
        xi1, xi2 = 0.0, float(y.mean())
    else:
        xm = x.mean()
        ym = y.mean()
        xd = x - xm
        xi1 = float(np.dot(xd, y - ym) / np.dot(xd, xd))
        xi2 = float(ym - xi1 * xm)
    levels = xi1 * x + xi2
    rates = _annualize(levels, T - t - 1, floor)
    return xi1, xi2, rates


@dataclass
class InflationEstimator:
    """Per-(path, year) expected annual inflation table.

    ``rates[:, t]`` is I(T; t); the column at t = T carries the t = T-1 value
    forward (annuity pricing at retirement still needs an expected-inflation
    rate, and the same annual rate extends beyond the regression's last
    observation year).  ``coefs[t]`` stores (xi1, xi2) for t < T and
    ``cum`` the realized cumulative inflation used as the regressor.
    """

    T: int
    floor: float
    rates: np.ndarray   # (n_paths, T+1)
    coefs: np.ndarray   # (T, 2)
    cum: np.ndarray     # (n_paths, T+1)

    @classmethod
    def fit(cls, scenarios, T: int, floor: float = 0.5) -> "InflationEstimator":
        if not 1 <= T <= scenarios.horizon:
            raise DomainError(f"need 1 <= T <= horizon, got T={T}")
        cum = _cumulative_inflation(scenarios.pi)[:, : T + 1]
        n = scenarios.n_paths
        rates = np.empty((n, T + 1))
        coefs = np.empty((T, 2))
        for t in range(T):
            xi1, xi2, rates[:, t] = _fit_single_year(cum, t, T, floor)
            coefs[t] = (xi1, xi2)
        rates[:, T] = rates[:, T - 1]
        return cls(T=T, floor=floor, rates=rates, coefs=coefs, cum=cum)

    def annual_rate(self, t: int) -> np.ndarray:
        if not 0 <= t <= self.T:
            raise DomainError(f"t={t} outside 0..{self.T}")
        return self.rates[:, t]

    def projected_rate(self, t: int, k: int) -> np.ndarray:
        """I(T; k) as projectable from time t <= k.

        For k > t the horizon-k fitted line is evaluated at the projected
        regressor ``cum_t * (1 + I_t)^(k-t)`` (information available at t),
        floored and rooted exactly like the in-sample rates.
        """
        if not 0 <= t <= k <= self.T - 1:
            raise DomainError(f"need 0 <= t <= k < T, got t={t}, k={k}")
        if k == t:
            return self.rates[:, t]
        xhat = self.cum[:, t] * (1.0 + self.rates[:, t]) ** (k - t)
        levels = self.coefs[k, 0] * xhat + self.coefs[k, 1]
        return _annualize(levels, self.T - k - 1, self.floor)
