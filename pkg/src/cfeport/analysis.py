"""Batch studies over the structurer: cost grids, diversification sweeps,
and report emission."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .metrics import CfeTarget, shortfall, shortfall_var
from .scenarios import ScenarioSet
from .structurer import solve_single

_MAX_SUBSETS = 2000


@dataclass
class CostGrid:
    """Optimal cost per MWh of load over an (alpha, p_c) grid.

    Infeasible cells carry NaN cost and an 'infeasible' status instead of a
    number.  Axes are sorted ascending.
    """

    alphas: np.ndarray
    pcs: np.ndarray
    cost: np.ndarray
    status: list

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.pcs = np.asarray(self.pcs, dtype=float)
        self.cost = np.asarray(self.cost, dtype=float)
        if np.any(np.diff(self.alphas) <= 0) or np.any(np.diff(self.pcs) <= 0):
            raise ValueError("grid axes must be strictly ascending")
        if self.cost.shape != (self.alphas.size, self.pcs.size):
            raise ValueError("cost matrix shape does not match the axes")


@dataclass
class FrontierPoint:
    """One diversification candidate: subset, optimal cost, downside risk."""

    subset: tuple
    cost_per_mwh_load: float
    shortfall_var: float
    size: int

    def __post_init__(self):
        if self.shortfall_var < 0:
            raise ValueError("shortfall VaR must be nonnegative")


@dataclass
class DiversificationResult:
    points: list
    infeasible: list  # subsets whose restricted universe cannot reach the target


def _default_workers():
    return max(1, (os.cpu_count() or 2) // 2)


def cost_grid(s: ScenarioSet, k: int, alphas, pcs, bounds=None, settings=None,
              max_workers=None, warm_start=False) -> CostGrid:
    """solve_single per (alpha, p_c) cell; cells beyond reach are flagged.

    By default cells are independent cold-started solves (reproducible
    regardless of evaluation order) run on a thread pool; output ordering
    follows the axes.  `warm_start=True` trades that independence for speed,
    seeding each cell from its left neighbor within the row.
    """
    alphas = np.unique(np.asarray(alphas, dtype=float))
    pcs = np.unique(np.asarray(pcs, dtype=float))
    if alphas.size == 0 or pcs.size == 0:
        raise ValueError("grid axes must be nonempty")

    def solve_cell(cell, w0=None):
        alpha, p_c = cell
        try:
            rep = solve_single(s, k, CfeTarget(p_c=p_c, alpha=alpha), bounds,
                               settings, w0=w0)
            return rep.cost_per_mwh_load, rep.status, rep.weights
        except InfeasibleError:
            return float("nan"), "infeasible", None

    if warm_start:
        results = []
        for alpha in alphas:
            prev = None
            for p_c in pcs:
                out = solve_cell((alpha, p_c), w0=prev)
                prev = out[2] if out[2] is not None else prev
                results.append(out)
    else:
        cells = list(itertools.product(alphas, pcs))
        with ThreadPoolExecutor(max_workers=max_workers or _default_workers()) as pool:
            results = list(pool.map(solve_cell, cells))
    cost = np.array([r[0] for r in results]).reshape(alphas.size, pcs.size)
    status = [
        [results[i * pcs.size + j][1] for j in range(pcs.size)]
        for i in range(alphas.size)
    ]
    return CostGrid(alphas=alphas, pcs=pcs, cost=cost, status=status)


def paired_subsets(s: ScenarioSet, n_values) -> list:
    """Paper-style diversification template: n solar + n wind + every hydro asset."""
    solar = [a.id for a in s.assets if a.kind == "solar"]
    wind = [a.id for a in s.assets if a.kind == "wind"]
    hydro = [a.id for a in s.assets if a.kind == "hydro"]
    subsets = []
    for n in n_values:
        if n < 1 or n > len(solar) or n > len(wind):
            raise ValueError(f"cannot draw {n} solar + {n} wind from this universe")
        for sol_pick in itertools.combinations(solar, n):
            for wind_pick in itertools.combinations(wind, n):
                subsets.append(list(sol_pick) + list(wind_pick) + hydro)
    return subsets


def diversification_sweep(s: ScenarioSet, k: int, target: CfeTarget, subsets,
                          beta: float, bounds=None, settings=None,
                          max_workers=None) -> DiversificationResult:
    """Optimal cost and shortfall VaR for each asset subset.

    Subsets that cannot reach the target are reported in `infeasible` and
    skipped.  Requests beyond the enumeration cap are rejected outright since
    every subset is a full solve.
    """
    subsets = [list(sub) for sub in subsets]
    if len(subsets) > _MAX_SUBSETS:
        raise ValueError(
            f"{len(subsets)} subsets requested; cap is {_MAX_SUBSETS}. "
            "Split the sweep or prune the template."
        )
    if not subsets:
        raise ValueError("no subsets to sweep")

    def solve_subset(ids):
        sub = s.subset(ids)
        sub_bounds = None
        if bounds is not None:
            index = {a: i for i, a in enumerate(s.asset_ids)}
            rows = [index[i] for i in ids]
            lo = np.broadcast_to(np.asarray(bounds[0], dtype=float), (s.n_assets,))[rows]
            hi = np.broadcast_to(np.asarray(bounds[1], dtype=float), (s.n_assets,))[rows]
            sub_bounds = (lo, hi)
        try:
            rep = solve_single(sub, k, target, sub_bounds, settings)
        except InfeasibleError:
            return None
        y = shortfall(sub, k, rep.weights)
        return FrontierPoint(
            subset=tuple(ids),
            cost_per_mwh_load=rep.cost_per_mwh_load,
            shortfall_var=shortfall_var(y, beta),
            size=len(ids),
        )

    with ThreadPoolExecutor(max_workers=max_workers or _default_workers()) as pool:
        results = list(pool.map(solve_subset, subsets))
    points = [r for r in results if r is not None]
    infeasible = [tuple(sub) for sub, r in zip(subsets, results) if r is None]
    return DiversificationResult(points=points, infeasible=infeasible)
