"""Brute-force verifiers for desk-scale instances.

`grid_search_optimum` enumerates a weight lattice and checks the empirical
quantile constraint exactly, providing an independent answer to compare the
SQP path against; `check_feasible_all` verifies the almost-sure constraint
scenario by scenario.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleError
from .metrics import _order_stat_index, annual_scores
from .scenarios import ScenarioSet, average_generation

_CHUNK_ROWS = 2048


def check_feasible_all(s: ScenarioSet, k: int, w, p_c: float):
    """True iff every scenario's annual score reaches p_c; also the worst index."""
    scores = annual_scores(s, k, w).scores
    worst = int(np.argmin(scores))
    return bool(scores[worst] >= p_c), worst


def _lattice(lo: float, hi: float, res: float) -> np.ndarray:
    n_steps = int(np.floor((hi - lo) / res + 1e-9))
    pts = lo + res * np.arange(n_steps + 1)
    if hi - pts[-1] > 1e-12:
        pts = np.append(pts, hi)
    else:
        pts[-1] = hi  # include the endpoint exactly
    return pts


class _BatchFeasibility:
    """Vectorized 'at least ceil(alpha*N) scenarios reach p_c' check for weight batches."""

    def __init__(self, s: ScenarioSet, k: int, p_c: float, alpha: float):
        i, n, t = s.generation.shape
        self.ratio = (s.generation / s.load_matrix(k)).reshape(i, n * t)
        self.n, self.t = n, t
        self.p_c = p_c
        self.k_idx = _order_stat_index(n, alpha)

    def __call__(self, w_batch: np.ndarray) -> np.ndarray:
        pi = w_batch @ self.ratio  # (B, N*T)
        np.minimum(pi, 1.0, out=pi)
        scores = pi.reshape(w_batch.shape[0], self.n, self.t).mean(axis=2)
        quantile = np.partition(scores, self.k_idx - 1, axis=1)[:, self.k_idx - 1]
        return quantile >= self.p_c - 1e-12


def grid_search_optimum(s: ScenarioSet, k: int, p_c: float, alpha: float,
                        bounds=None, resolution: float = 0.005):
    """Cheapest feasible lattice point over {lo, lo+res, ..., hi}^I.

    Exploits that feasibility is monotone in each weight: the last coordinate
    is bisected over the lattice per combination of the leading coordinates.
    Ties break toward the lexicographically smallest weight vector.  Accepts
    p_c = 0 (always feasible, returns the cheapest corner).
    """
    n_assets = s.n_assets
    if n_assets > 3:
        raise ValueError("grid search oracle is limited to I <= 3 assets")
    if not 0 < resolution <= 0.1:
        raise ValueError("resolution must lie in (0, 0.1]")
    if bounds is None:
        lo = np.zeros(n_assets)
        hi = np.ones(n_assets)
    else:
        lo = np.broadcast_to(np.asarray(bounds[0], dtype=float), (n_assets,))
        hi = np.broadcast_to(np.asarray(bounds[1], dtype=float), (n_assets,))

    feasible = _BatchFeasibility(s, k, p_c, alpha)
    cost_vec = np.array([a.cost for a in s.assets]) * average_generation(s)
    axes = [_lattice(lo[i], hi[i], resolution) for i in range(n_assets)]
    last = axes[-1]

    if n_assets == 1:
        combos = np.zeros((1, 0))
    else:
        mesh = np.meshgrid(*axes[:-1], indexing="ij")
        combos = np.stack([m.ravel() for m in mesh], axis=1)

    best_cost = np.inf
    best_w = None
    for start in range(0, combos.shape[0], _CHUNK_ROWS):
        chunk = combos[start:start + _CHUNK_ROWS]
        rows = chunk.shape[0]

        def eval_at(idx):
            w = np.empty((rows, n_assets))
            w[:, :-1] = chunk
            w[:, -1] = last[idx]
            return feasible(w)

        ok_top = eval_at(np.full(rows, last.size - 1, dtype=int))
        lo_idx = np.zeros(rows, dtype=int)
        hi_idx = np.full(rows, last.size - 1, dtype=int)
        ok_bottom = eval_at(lo_idx)
        hi_idx[ok_bottom] = 0
        active = ok_top & ~ok_bottom
        while np.any(lo_idx[active] + 1 < hi_idx[active]):
            mid = (lo_idx + hi_idx) // 2
            ok_mid = eval_at(mid)
            take = active & ok_mid
            hi_idx[take] = mid[take]
            miss = active & ~ok_mid
            lo_idx[miss] = mid[miss]
        # hi_idx now holds the smallest feasible lattice index per feasible row.
        for r in np.nonzero(ok_top)[0]:
            w = np.append(chunk[r], last[hi_idx[r]])
            cost = float(np.dot(cost_vec, w))
            if cost < best_cost - 1e-12 or (
                abs(cost - best_cost) <= 1e-12
                and best_w is not None
                and tuple(w) < tuple(best_w)
            ):
                best_cost = cost
                best_w = w

    if best_w is None:
        raise InfeasibleError(
            f"no lattice point meets p_c={p_c} at alpha={alpha}", load=k
        )
    return best_w, best_cost
