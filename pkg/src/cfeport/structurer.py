"""Least-cost portfolio construction against CFE quantile targets.

Single-load solves initialize from the Gaussian-surrogate problem and then
optimize against the exact empirical-quantile constraint; almost-sure targets
(alpha = 1) constrain the worst scenario directly.  Multi-load variants cover
priority cascading (sequential), equal splits, and cooperative joint
minimization over the stacked weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InfeasibleError
from .metrics import (
    CfeTarget,
    PortfolioWeights,
    ScoreEvaluator,
    _order_stat_index,
    cost_per_mw_load,
    over_procurement,
    portfolio_cost,
)
from .scenarios import ScenarioSet, average_generation
from .sqp import NlpProblem, SqpSettings, slsqp_solve

_BINDING_TOL = 1e-4
_QUANTILE_TOL = 1e-6


@dataclass(frozen=True)
class LoadSpec:
    """One load customer's index, target, and priority rank (lower solves first)."""

    load: int
    target: CfeTarget
    priority: int = 0


@dataclass
class SolveReport:
    """Everything reported about one optimized single-load portfolio."""

    load: int
    target: CfeTarget
    asset_ids: list[str]
    weights: np.ndarray
    upper_bounds: np.ndarray
    hourly_cost: float
    cost_per_mwh_load: float
    achieved_quantile: float
    mean_score: float
    over_procurement: float
    binding_lower: list[str]
    binding_upper: list[str]
    quantile_active: bool
    status: str
    iterations: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.status == "converged" and self.achieved_quantile < self.target.p_c - _QUANTILE_TOL:
            raise ValueError(
                f"converged report violates its target: quantile "
                f"{self.achieved_quantile:.6f} < p_c {self.target.p_c}"
            )


@dataclass
class MultiLoadReport:
    """Per-load reports plus the cost decomposition for one allocation strategy."""

    strategy: str  # sequential | split | joint
    reports: list[SolveReport]
    costs: list[float] = field(default_factory=list)  # hourly USD per load
    total_cost: float = None

    def __post_init__(self):
        if not self.costs:
            self.costs = [r.hourly_cost for r in self.reports]
        if self.total_cost is None:
            self.total_cost = float(sum(self.costs))
        if self.reports:
            stacked = np.sum([r.weights for r in self.reports], axis=0)
            if np.any(stacked > 1.0 + 1e-9):
                raise ValueError(
                    f"strategy {self.strategy}: combined procurement exceeds capacity "
                    f"(max sum {stacked.max():.9f})"
                )


@dataclass
class MarginalResult:
    """Energy-weighted shares of the next unit of load, plus the raw weight deltas."""

    shares: np.ndarray
    dw_deps: np.ndarray
    epsilon: float
    base: SolveReport
    bumped: SolveReport


def _resolve_bounds(s: ScenarioSet, bounds):
    n = s.n_assets
    if bounds is None:
        return np.zeros(n), np.ones(n)
    if isinstance(bounds, PortfolioWeights):
        return bounds.lower.copy(), bounds.upper.copy()
    lo, hi = bounds
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    if np.any(lo < -1e-12) or np.any(hi > 1 + 1e-12) or np.any(lo > hi + 1e-12):
        raise ValueError("bounds must satisfy 0 <= lo <= hi <= 1 per asset")
    return lo, hi


def _empirical_quantile_of(scores: np.ndarray, alpha: float) -> float:
    k = _order_stat_index(scores.size, alpha)
    return float(np.partition(scores, k - 1)[k - 1])


def _linear_cost(s: ScenarioSet):
    coeff = np.array([a.cost for a in s.assets]) * average_generation(s)

    def objective(w):
        return float(np.dot(coeff, w))

    def gradient(_w):
        return coeff.copy()

    return coeff, objective, gradient


def _restore_feasibility(w, hi, g, steps=60):
    """Scale w toward the upper bounds until g(w) >= 0 (g nondecreasing along the ray)."""
    if g(w) >= 0:
        return w
    if g(hi) < 0:
        raise InfeasibleError("target unattainable even at the upper bounds")
    t_lo, t_hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (t_lo + t_hi)
        if g(w + mid * (hi - w)) >= 0:
            t_hi = mid
        else:
            t_lo = mid
    return w + t_hi * (hi - w)


def _exchange_polish(w, lo, hi, g, cost_coeff, rounds=3, steps=30):
    """Two-coordinate trades: raise one weight, bisect another to its minimum.

    Escapes vertices of the nonconvex quantile boundary where no single
    coordinate can move.  Every trial point is feasible by construction;
    trades are kept only when they lower the cost.  Quadratic in the number of
    assets, so callers reserve it for instances with cheap evaluations.
    """
    w = np.asarray(w, dtype=float).copy()
    if g(w) < 0:
        return w
    n = w.size
    for _ in range(rounds):
        accepted = False
        for j in range(n):
            for i in range(n):
                if i == j:
                    continue
                room = hi[j] - w[j]
                if room <= 1e-10 or w[i] - lo[i] <= 1e-10:
                    continue
                for frac in (1.0, 0.5, 0.25, 0.125):
                    trial = w.copy()
                    trial[j] = w[j] + room * frac
                    trial[i] = lo[i]
                    if g(trial) < 0:
                        a, b = lo[i], w[i]
                        for _ in range(steps):
                            trial[i] = 0.5 * (a + b)
                            if g(trial) >= 0:
                                b = trial[i]
                            else:
                                a = trial[i]
                        trial[i] = b
                    if np.dot(cost_coeff, trial) < np.dot(cost_coeff, w) - 1e-9:
                        w = trial
                        accepted = True
                        break
        if not accepted:
            break
    return w


def _coarse_lattice_seed(ev: ScoreEvaluator, coeff, lo, hi, alpha, p_c,
                         points_per_axis=13, chunk=2048):
    """Cheapest feasible point of a coarse weight lattice, as a solver start.

    A blunt scan that locates the right basin of the nonconvex feasible set;
    the SQP rounds and polishes refine from there.  Returns None when no
    lattice point is feasible (the caller's upper-bound check then governs).
    """
    axes = [np.linspace(lo[i], hi[i], points_per_axis) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    combos = np.stack([m.ravel() for m in mesh], axis=1)
    best_w, best_cost = None, np.inf
    for start in range(0, combos.shape[0], chunk):
        rows = combos[start:start + chunk]
        scores = ev.scores_batch(rows)
        k_idx = _order_stat_index(scores.shape[1], alpha)
        quant = np.partition(scores, k_idx - 1, axis=1)[:, k_idx - 1]
        feasible = quant >= p_c
        if not np.any(feasible):
            continue
        costs = rows[feasible] @ coeff
        arg = int(np.argmin(costs))
        if costs[arg] < best_cost:
            best_cost = float(costs[arg])
            best_w = rows[feasible][arg].copy()
    return best_w


def _coordinate_polish(w, lo, g, cost_coeff, rounds=2, steps=30):
    """Shrink weights one coordinate at a time while g stays nonnegative.

    The annual score is nondecreasing in every weight, so the cheapest
    feasible value of one coordinate (others fixed) is found exactly by
    bisection.  Run greedily from the most expensive asset; this cleans up the
    kink-induced slack the SQP iteration leaves behind on piecewise-linear
    constraints, and pushes unneeded weights onto their bounds.
    """
    w = np.asarray(w, dtype=float).copy()
    if g(w) < 0:
        return w
    order = np.argsort(-np.asarray(cost_coeff))
    for _ in range(rounds):
        changed = False
        for i in order:
            if cost_coeff[i] <= 0 or w[i] - lo[i] <= 1e-14:
                continue
            trial = w.copy()
            trial[i] = lo[i]
            if g(trial) >= 0:
                w[i] = lo[i]
                changed = True
                continue
            a, b = lo[i], w[i]
            for _ in range(steps):
                trial[i] = 0.5 * (a + b)
                if g(trial) >= 0:
                    b = trial[i]
                else:
                    a = trial[i]
            if w[i] - b > 1e-12:
                changed = True
            w[i] = b
        if not changed:
            break
    return w


def solve_approx(s: ScenarioSet, k: int, target: CfeTarget, bounds=None,
                 settings: SqpSettings = None) -> PortfolioWeights:
    """Minimize cost under the Gaussian-surrogate quantile constraint.

    Serves as the initializer for the exact solve; with a single scenario the
    sample deviation is taken as 0 and the constraint reduces to the mean.
    """
    if not 0 < target.alpha < 1:
        raise ValueError("the surrogate needs alpha strictly inside (0, 1)")
    lo, hi = _resolve_bounds(s, bounds)
    ev = ScoreEvaluator(s, k)
    z = float(stats.norm.ppf(1.0 - target.alpha))

    def surrogate(w):
        sc = ev.scores(w)
        sd = float(sc.std(ddof=1)) if sc.size > 1 else 0.0
        return float(sc.mean()) + z * sd - target.p_c

    top = surrogate(hi)
    if top < 0:
        raise InfeasibleError(
            f"surrogate quantile at the upper bounds is {top + target.p_c:.6f} < "
            f"p_c {target.p_c}",
            max_attainable=top + target.p_c,
            load=k,
        )
    _, objective, gradient = _linear_cost(s)
    problem = NlpProblem(
        dim=s.n_assets,
        objective=objective,
        constraints=[surrogate],
        lower=lo,
        upper=hi,
        objective_gradient=gradient,
    )
    result = slsqp_solve(problem, hi, settings)
    w = _restore_feasibility(result.w, hi, surrogate)
    return PortfolioWeights(w=w, lower=lo, upper=hi)


def _build_report(s, k, target, w, lo, hi, status, iterations) -> SolveReport:
    ev = ScoreEvaluator(s, k)
    scores = ev.scores(w)
    achieved = _empirical_quantile_of(scores, target.alpha)
    binding_lower = [a.id for a, wi, li in zip(s.assets, w, lo) if wi - li <= _BINDING_TOL]
    binding_upper = [a.id for a, wi, ui in zip(s.assets, w, hi) if ui - wi <= _BINDING_TOL]
    return SolveReport(
        load=k,
        target=target,
        asset_ids=s.asset_ids,
        weights=np.asarray(w, dtype=float),
        upper_bounds=np.asarray(hi, dtype=float),
        hourly_cost=portfolio_cost(s, w),
        cost_per_mwh_load=cost_per_mw_load(s, k, w),
        achieved_quantile=achieved,
        mean_score=float(scores.mean()),
        over_procurement=over_procurement(s, k, w),
        binding_lower=binding_lower,
        binding_upper=binding_upper,
        quantile_active=achieved - target.p_c <= _BINDING_TOL,
        status=status,
        iterations=iterations,
    )


def solve_single(s: ScenarioSet, k: int, target: CfeTarget, bounds=None,
                 settings: SqpSettings = None, w0=None) -> SolveReport:
    """Least-cost portfolio meeting the empirical quantile target for load k.

    Initializes at the Gaussian-surrogate optimum (upper bounds when
    alpha = 1, where the constraint is the worst scenario) and finishes with a
    feasibility-restoring scale toward the upper bounds, so a converged report
    never violates its target.  An explicit `w0` (warm start) skips the
    surrogate initialization.
    """
    lo, hi = _resolve_bounds(s, bounds)
    ev = ScoreEvaluator(s, k)
    alpha, p_c = target.alpha, target.p_c

    def quantile_of(w):
        return _empirical_quantile_of(ev.scores(w), alpha)

    q_top = quantile_of(hi)
    if q_top < p_c:
        raise InfeasibleError(
            f"load {k}: maximum attainable quantile at the upper bounds is "
            f"{q_top:.6f} < p_c {p_c}",
            max_attainable=q_top,
            load=k,
        )

    if w0 is not None:
        w0 = np.clip(np.asarray(w0, dtype=float), lo, hi)
    elif alpha >= 1.0:
        w0 = hi.copy()
    else:
        try:
            w0 = solve_approx(s, k, target, (lo, hi), settings).w
        except InfeasibleError:
            # The Gaussian surrogate can be conservative; the exact problem is
            # feasible (checked above), so start from the upper bounds.
            w0 = hi.copy()

    def constraint(w):
        return quantile_of(w) - p_c

    coeff, objective, gradient = _linear_cost(s)
    problem = NlpProblem(
        dim=s.n_assets,
        objective=objective,
        constraints=[constraint],
        lower=lo,
        upper=hi,
        objective_gradient=gradient,
    )

    # The quantile constraint boundary is a nonconvex union of facets, so on
    # small instances (cheap evaluations) throw in a coarse-lattice start and
    # pairwise-exchange polish to escape local vertices.
    small = s.n_scenarios * s.n_hours <= 120_000 and 2 <= s.n_assets <= 4
    starts = [w0]
    if small:
        seed = _coarse_lattice_seed(ev, coeff, lo, hi, alpha, p_c)
        if seed is not None:
            starts.append(seed)

    best_w, best_cost, best_status, iterations = None, np.inf, "max_iter", 0
    for w_start in starts:
        # Restarting from the polished iterate re-linearizes the piecewise
        # constraint on a fresh facet, sliding off vertices where one pass
        # stalls.  Stop as soon as a round stops paying.
        start = w_start
        for round_ in range(3):
            result = slsqp_solve(problem, start, settings)
            iterations += result.iterations
            w = _restore_feasibility(result.w, hi, constraint)
            w = _coordinate_polish(w, lo, constraint, coeff)
            cost = objective(w)
            meaningful = best_w is None or cost < best_cost * (1 - 1e-6)
            if best_w is None or cost < best_cost:
                best_w, best_cost, best_status = w, cost, result.status
            if result.status == "converged" and cost <= best_cost * (1 + 1e-6):
                best_status = "converged"  # a round stabilized at the best point
            polish_moved = abs(cost - objective(result.w)) > 1e-9 * max(1.0, abs(cost))
            if (not meaningful and round_ > 0) or (
                result.status == "converged" and not polish_moved
            ):
                break
            start = w
    if small:
        w = _exchange_polish(best_w, lo, hi, constraint, coeff)
        w = _coordinate_polish(w, lo, constraint, coeff)
        if float(np.dot(coeff, w)) < best_cost:
            best_w = w
    return _build_report(s, k, target, best_w, lo, hi, best_status, iterations)


def _ordered(loads) -> list[LoadSpec]:
    if not loads:
        raise ValueError("need at least one load")
    return sorted(loads, key=lambda l: l.priority)


def solve_sequential(s: ScenarioSet, loads, bounds=None,
                     settings: SqpSettings = None) -> MultiLoadReport:
    """Priority cascade: each load solves over whatever capacity remains."""
    _, hi = _resolve_bounds(s, bounds)
    used = np.zeros(s.n_assets)
    reports = []
    for spec in _ordered(loads):
        remaining = np.maximum(0.0, hi - used)
        try:
            rep = solve_single(s, spec.load, spec.target, (np.zeros(s.n_assets), remaining),
                               settings)
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"sequential stage for load {spec.load} is infeasible: {exc}",
                max_attainable=exc.max_attainable,
                load=spec.load,
            ) from exc
        used = used + rep.weights
        reports.append(rep)
    return MultiLoadReport(strategy="sequential", reports=reports)


def solve_split(s: ScenarioSet, loads, k_split: int = None, bounds=None,
                settings: SqpSettings = None) -> MultiLoadReport:
    """Equal split: every load sees 1/K of each asset, solved independently."""
    loads = list(loads)
    k_split = len(loads) if k_split is None else k_split
    if k_split < max(1, len(loads)):
        raise ValueError("split factor must cover every load")
    _, hi = _resolve_bounds(s, bounds)
    per_load_hi = hi / k_split
    reports = []
    for spec in loads:
        try:
            rep = solve_single(s, spec.load, spec.target,
                               (np.zeros(s.n_assets), per_load_hi), settings)
        except InfeasibleError as exc:
            raise InfeasibleError(
                f"split allocation for load {spec.load} is infeasible: {exc}",
                max_attainable=exc.max_attainable,
                load=spec.load,
            ) from exc
        reports.append(rep)
    return MultiLoadReport(strategy="split", reports=reports)


def _slice_fd_gradient(fn, x, sl, lower, upper, step):
    """Central-difference gradient known to be zero outside slice `sl`."""
    grad = np.zeros(x.size)
    for i in range(sl.start, sl.stop):
        h = step * max(1.0, abs(x[i]))
        up_ok = x[i] + h <= upper[i]
        down_ok = x[i] - h >= lower[i]
        xp, xm = x.copy(), x.copy()
        if up_ok and down_ok:
            xp[i] += h
            xm[i] -= h
            denom = 2 * h
        elif up_ok:
            xp[i] += h
            denom = h
        else:
            xm[i] -= h
            denom = h
        grad[i] = (fn(xp) - fn(xm)) / denom
    return grad


def solve_joint(s: ScenarioSet, loads, bounds=None,
                settings: SqpSettings = None) -> MultiLoadReport:
    """Cooperative solve: minimize total cost over the stacked weight vector.

    Initialized from the sequential solution (feasible by construction) with
    per-load quantile constraints plus shared-capacity rows per asset.
    """
    loads = list(loads)
    settings = settings or SqpSettings()
    seq = solve_sequential(s, loads, bounds, settings)
    order = {spec.load: i for i, spec in enumerate(_ordered(loads))}
    # Reports in solve order; re-stack following the caller's list order.
    w0 = np.concatenate([seq.reports[order[spec.load]].weights for spec in loads])

    n = s.n_assets
    n_loads = len(loads)
    dim = n_loads * n
    lo, hi = _resolve_bounds(s, bounds)
    coeff, _, _ = _linear_cost(s)
    cost_vec = np.tile(coeff, n_loads)

    stacked_lo = np.zeros(dim)
    stacked_hi = np.tile(hi, n_loads)

    evs = [ScoreEvaluator(s, spec.load) for spec in loads]
    constraints, grads = [], []
    for idx, spec in enumerate(loads):
        sl = slice(idx * n, (idx + 1) * n)
        ev, alpha, p_c = evs[idx], spec.target.alpha, spec.target.p_c

        def g(x, ev=ev, alpha=alpha, p_c=p_c, sl=sl):
            return _empirical_quantile_of(ev.scores(x[sl]), alpha) - p_c

        def dg(x, g=g, sl=sl):
            return _slice_fd_gradient(g, x, sl, stacked_lo, stacked_hi, settings.fd_step)

        constraints.append(g)
        grads.append(dg)
    for i in range(n):
        row = np.zeros(dim)
        row[i::n] = -1.0

        def g_cap(x, i=i, cap=hi[i]):
            return float(cap - x[i::n].sum())

        def dg_cap(_x, row=row):
            return row.copy()

        constraints.append(g_cap)
        grads.append(dg_cap)

    problem = NlpProblem(
        dim=dim,
        objective=lambda x: float(np.dot(cost_vec, x)),
        constraints=constraints,
        lower=stacked_lo,
        upper=stacked_hi,
        objective_gradient=lambda _x: cost_vec.copy(),
        constraint_gradients=grads,
    )
    result = slsqp_solve(problem, w0, settings)
    x = result.w.copy()

    # Restore any residual per-load violation using unclaimed capacity, then
    # polish each slice (shrinking weights never breaks the shared capacity).
    for idx, spec in enumerate(loads):
        sl = slice(idx * n, (idx + 1) * n)

        def g(wk, ev=evs[idx], t=spec.target):
            return _empirical_quantile_of(ev.scores(wk), t.alpha) - t.p_c

        if g(x[sl]) < 0:
            others = x.reshape(n_loads, n).sum(axis=0) - x[sl]
            headroom = np.maximum(0.0, hi - others)
            x[sl] = _restore_feasibility(x[sl], headroom, g)
        x[sl] = _coordinate_polish(x[sl], np.zeros(n), g, coeff)

    reports = []
    for idx, spec in enumerate(loads):
        wk = x[idx * n:(idx + 1) * n]
        reports.append(
            _build_report(s, spec.load, spec.target, wk, np.zeros(n), hi,
                          result.status, result.iterations)
        )
    return MultiLoadReport(strategy="joint", reports=reports)


def marginal_portfolio(s: ScenarioSet, k: int, target: CfeTarget, bounds=None,
                       epsilon: float = 0.01,
                       settings: SqpSettings = None) -> MarginalResult:
    """Which assets supply the next unit of load.

    Re-solves with load k scaled by (1 + epsilon) and converts the weight
    changes into energy-weighted shares; assets already at their upper bound
    in both solves report a share of exactly 0.
    """
    if not 0 < epsilon <= 0.05:
        raise ValueError(f"epsilon must lie in (0, 0.05], got {epsilon}")
    base = solve_single(s, k, target, bounds, settings)
    bumped = solve_single(s.with_scaled_load(k, 1.0 + epsilon), k, target, bounds, settings)
    dw = bumped.weights - base.weights
    gbar = average_generation(s)
    energy = dw * gbar
    fully_used = (base.upper_bounds - base.weights <= _BINDING_TOL) & (
        bumped.upper_bounds - bumped.weights <= _BINDING_TOL
    )
    energy[fully_used] = 0.0
    denom = float(energy.sum())
    if abs(denom) <= 1e-12:
        raise ValueError("degenerate marginal portfolio: weights did not move")
    return MarginalResult(
        shares=energy / denom,
        dw_deps=dw / epsilon,
        epsilon=epsilon,
        base=base,
        bumped=bumped,
    )
