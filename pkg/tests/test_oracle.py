"""Brute-force verifiers: lattice search and all-scenario feasibility."""

import numpy as np
import pytest

from cfeport import metrics as me
from cfeport import oracle as orc
from cfeport.errors import InfeasibleError
from conftest import build_random_set


class TestCheckFeasibleAll:
    def test_all_scenarios_pass(self, toy_set):
        ok, worst = orc.check_feasible_all(toy_set, 0, np.array([14 / 15]), 0.7)
        assert ok

    def test_failure_reports_worst_index(self):
        rng = np.random.default_rng(1)
        s = build_random_set(rng, 1, 6, 24)
        w = np.array([0.5])
        scores = me.annual_scores(s, 0, w).scores
        ok, worst = orc.check_feasible_all(s, 0, w, float(scores.max()))
        assert not ok
        assert worst == int(np.argmin(scores))

    def test_zero_weights_fail_positive_target(self, toy_set):
        ok, _ = orc.check_feasible_all(toy_set, 0, np.array([0.0]), 0.1)
        assert not ok

    def test_agrees_with_quantile_at_alpha_one(self):
        rng = np.random.default_rng(4)
        for _ in range(8):
            s = build_random_set(rng, 2, 7, 20)
            w = rng.uniform(0, 1, 2)
            p_c = float(rng.uniform(0.1, 0.9))
            ok, _ = orc.check_feasible_all(s, 0, w, p_c)
            q = me.empirical_quantile(me.annual_scores(s, 0, w), 1.0)
            assert ok == (q >= p_c)


class TestGridSearch:
    def test_toy_lattice_optimum(self, toy_set):
        w, cost = orc.grid_search_optimum(toy_set, 0, 0.7, 1.0, resolution=0.001)
        assert w == pytest.approx([0.934], abs=1e-12)
        assert cost == pytest.approx(700.5, abs=1e-9)

    def test_pc_zero_returns_cheapest_corner(self, toy_set):
        w, cost = orc.grid_search_optimum(toy_set, 0, 0.0, 1.0, resolution=0.05)
        assert w == pytest.approx([0.0])
        assert cost == 0.0

    def test_infeasible_target_raises(self, toy_set):
        with pytest.raises(InfeasibleError):
            orc.grid_search_optimum(toy_set, 0, 0.99, 1.0, resolution=0.05)

    def test_validation(self, toy_set):
        with pytest.raises(ValueError, match="resolution"):
            orc.grid_search_optimum(toy_set, 0, 0.5, 1.0, resolution=0.5)
        rng = np.random.default_rng(0)
        big = build_random_set(rng, 4, 3, 10)
        with pytest.raises(ValueError, match="I <= 3"):
            orc.grid_search_optimum(big, 0, 0.5, 1.0)

    def test_lattice_includes_endpoints(self):
        pts = orc._lattice(0.0, 1.0, 0.3)
        assert pts[0] == 0.0 and pts[-1] == 1.0

    def test_matches_exhaustive_enumeration(self):
        # Independent cross-check of the bisection lattice scan.
        rng = np.random.default_rng(6)
        s = build_random_set(rng, 2, 6, 16)
        p_c, alpha, res = 0.55, 0.8, 0.05
        w_fast, cost_fast = orc.grid_search_optimum(s, 0, p_c, alpha, resolution=res)
        pts = orc._lattice(0.0, 1.0, res)
        best = None
        for w0 in pts:
            for w1 in pts:
                w = np.array([w0, w1])
                q = me.empirical_quantile(me.annual_scores(s, 0, w), alpha)
                if q >= p_c:
                    cost = me.portfolio_cost(s, w)
                    if best is None or cost < best[1] - 1e-12:
                        best = (w, cost)
        assert best is not None
        assert cost_fast == pytest.approx(best[1], abs=1e-9)

    def test_deterministic_tie_break(self):
        # Two identical free assets: ties resolve to the lexicographically
        # smallest weight vector.
        import cfeport.scenarios as sc

        assets = [
            sc.AssetSpec(id="a", kind="other", capacity=100, cost=0.0),
            sc.AssetSpec(id="b", kind="other", capacity=100, cost=0.0),
        ]
        gen = np.full((2, 1, 4), 100.0)
        s = sc.ScenarioSet(assets=assets, generation=gen,
                           loads=[np.full((1, 4), 100.0)])
        w, cost = orc.grid_search_optimum(s, 0, 0.5, 1.0, resolution=0.1)
        assert cost == 0.0
        assert w == pytest.approx([0.0, 0.5])
