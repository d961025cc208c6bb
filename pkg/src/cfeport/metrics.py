"""CFE score mathematics: capped hourly ratios, annual score distributions,
empirical and Gaussian quantiles, cost metrics, shortfall VaR, and the
hour-by-day heatmap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .scenarios import ScenarioSet, average_generation


@dataclass
class PortfolioWeights:
    """Procured fraction of each asset, with per-asset box bounds in [0, 1]."""

    w: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        self.w = np.atleast_1d(np.asarray(self.w, dtype=float))
        n = self.w.size
        self.lower = np.zeros(n) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (n,)
        ).copy()
        self.upper = np.ones(n) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (n,)
        ).copy()
        if np.any(self.lower < -1e-12) or np.any(self.upper > 1 + 1e-12):
            raise ValueError("weight bounds must lie within [0, 1]")
        if np.any(self.lower > self.upper + 1e-12):
            raise ValueError("lower bounds exceed upper bounds")
        if np.any(self.w < self.lower - 1e-9) or np.any(self.w > self.upper + 1e-9):
            raise ValueError("weights violate their bounds")


@dataclass(frozen=True)
class CfeTarget:
    """Target annual score p_c to be met with probability alpha across scenarios."""

    p_c: float
    alpha: float

    def __post_init__(self):
        if not 0 < self.p_c <= 1:
            raise ValueError(f"p_c must lie in (0, 1], got {self.p_c}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")


@dataclass
class ScoreDistribution:
    """Per-scenario annual CFE scores with sample mean and std (divisor N-1)."""

    scores: np.ndarray
    mu: float = None
    sigma: float = None

    def __post_init__(self):
        self.scores = np.atleast_1d(np.asarray(self.scores, dtype=float))
        if self.scores.size == 0:
            raise ValueError("score distribution must contain at least one scenario")
        if self.scores.min() < -1e-12 or self.scores.max() > 1 + 1e-12:
            raise ValueError("annual scores must lie in [0, 1]")
        if self.mu is None:
            self.mu = float(self.scores.mean())
        if self.sigma is None:
            n = self.scores.size
            self.sigma = float(self.scores.std(ddof=1)) if n > 1 else float("nan")

    @property
    def n(self) -> int:
        return self.scores.size


def hourly_ratio(pi_t, load_t):
    """Fraction of load matched in one hour, capped at 1."""
    pi_t = np.asarray(pi_t, dtype=float)
    load_t = np.asarray(load_t, dtype=float)
    if np.any(load_t <= 0):
        raise ValueError("load must be strictly positive")
    if np.any(pi_t < 0):
        raise ValueError("portfolio generation must be nonnegative")
    out = np.minimum(pi_t / load_t, 1.0)
    return float(out) if out.ndim == 0 else out


class ScoreEvaluator:
    """Annual scores as a function of weights against a fixed (ScenarioSet, load).

    This is the one scoring code path in the package: every caller (pure API,
    solver internals, feasibility checks) sees bit-identical values for the
    same weights.  Instances reuse a scratch buffer and are not safe for
    concurrent use; the module-level `annual_scores` allocates fresh state and
    is.
    """

    def __init__(self, s: ScenarioSet, k: int):
        self.generation = s.generation
        i, n, t = s.generation.shape
        self._flat_gen = self.generation.reshape(i, n * t)
        self._flat_load = s.load_matrix(k).reshape(n * t)
        self._shape = (n, t)
        self._buf = np.empty(n * t)

    def scores(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.generation.shape[0],):
            raise ValueError(
                f"expected {self.generation.shape[0]} weights, got shape {w.shape}"
            )
        np.dot(w, self._flat_gen, out=self._buf)
        self._buf /= self._flat_load
        np.minimum(self._buf, 1.0, out=self._buf)
        return self._buf.reshape(self._shape).mean(axis=1)

    def scores_batch(self, w_rows: np.ndarray) -> np.ndarray:
        """Annual scores for a whole batch of weight vectors, shape (B, N)."""
        pi = np.asarray(w_rows, dtype=float) @ self._flat_gen
        pi /= self._flat_load
        np.minimum(pi, 1.0, out=pi)
        return pi.reshape(w_rows.shape[0], *self._shape).mean(axis=2)

    def mean_score(self, w) -> float:
        return float(self.scores(w).mean())


def annual_scores(s: ScenarioSet, k: int, w) -> ScoreDistribution:
    """Per-scenario annual scores R̄ for portfolio weights `w` against load `k`."""
    weights = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=float)
    return ScoreDistribution(scores=ScoreEvaluator(s, k).scores(weights).copy())


def _order_stat_index(n: int, alpha: float) -> int:
    """1-based index of the order statistic backing the (1-alpha) lower quantile.

    Defined so 'quantile >= p_c' is exactly 'at least ceil(alpha*N) scenarios
    score >= p_c'.  The 1e-9 guard keeps ceil() exact when alpha*N is an
    integer up to float rounding (e.g. 0.95 * 1000).
    """
    required = math.ceil(alpha * n - 1e-9)
    return min(max(n - required + 1, 1), n)


def empirical_quantile(d: ScoreDistribution, alpha: float) -> float:
    """Lower empirical (1-alpha) quantile of the annual score distribution."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    k = _order_stat_index(d.n, alpha)
    return float(np.partition(d.scores, k - 1)[k - 1])


def gaussian_quantile(d: ScoreDistribution, alpha: float) -> float:
    """Gaussian surrogate quantile mu + Phi^{-1}(1-alpha) * sigma."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly in (0, 1), got {alpha}")
    if not np.isfinite(d.sigma):
        raise ValueError("sigma is undefined (need at least 2 scenarios)")
    return float(d.mu + stats.norm.ppf(1.0 - alpha) * d.sigma)


def portfolio_cost(s: ScenarioSet, w) -> float:
    """Hourly procurement cost sum_i c_i * gbar_i * w_i (USD per hour)."""
    weights = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=float)
    costs = np.array([a.cost for a in s.assets])
    return float(np.dot(costs * average_generation(s), weights))


def cost_per_mw_load(s: ScenarioSet, k: int, w) -> float:
    """Procurement cost per MWh of load: hourly cost over the load's grand mean."""
    return portfolio_cost(s, w) / float(s.load_matrix(k).mean())


def over_procurement(s: ScenarioSet, k: int, w) -> float:
    """Mean over scenarios and hours of the uncapped generation-to-load ratio."""
    weights = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=float)
    pi = np.tensordot(weights, s.generation, axes=(0, 0))
    return float((pi / s.load_matrix(k)).mean())


def shortfall(s: ScenarioSet, k: int, w) -> np.ndarray:
    """Per-scenario sum of relative hourly deficits, always <= 0."""
    weights = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=float)
    pi = np.tensordot(weights, s.generation, axes=(0, 0))
    load = s.load_matrix(k)
    return (np.minimum(pi - load, 0.0) / load).sum(axis=1)


def shortfall_var(y, beta: float) -> float:
    """Value-at-risk of the shortfall sample at level beta.

    Empirical convention: negate the k-th smallest value with
    k = max(1, ceil((1-beta)*N)), matching the quantile convention above and
    reporting the conservative (worse) tail value.  beta=0 is allowed and
    returns -max(y).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size == 0:
        raise ValueError("shortfall sample is empty")
    if not 0 <= beta < 1:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    k = max(1, math.ceil((1.0 - beta) * y.size - 1e-9))
    return float(-np.partition(y, k - 1)[k - 1])


def hourly_heatmap(s: ScenarioSet, k: int, w) -> np.ndarray:
    """Scenario-average hourly CFE score as a (24, days) matrix."""
    if s.n_hours % 24 != 0:
        raise ValueError(f"hours ({s.n_hours}) must be a multiple of 24")
    weights = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=float)
    pi = np.tensordot(weights, s.generation, axes=(0, 0))
    ratio = np.minimum(pi / s.load_matrix(k), 1.0)
    hourly_mean = ratio.mean(axis=0)  # (T,)
    days = s.n_hours // 24
    return hourly_mean.reshape(days, 24).T
