"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test prints one `[acceptance] <name>: PASS|FAIL` line so the suite
doubles as a checklist run (`pytest tests/test_acceptance.py -s`).
"""

import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cfeport import analysis as an
from cfeport import cli
from cfeport import metrics as me
from cfeport import oracle as orc
from cfeport import scenarios as sc
from cfeport import structurer as st
from cfeport.service import create_app
from cfeport.sqp import NlpProblem, fd_gradient, slsqp_solve
from conftest import build_random_set, replica_config


def _report(name, ok, detail=""):
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def replica_full():
    return sc.synthesize(replica_config(n_scenarios=200, n_hours=8760))


def test_oracle_equivalence():
    started = time.monotonic()
    rng = np.random.default_rng(42)
    checked = 0
    worst_ratio = 0.0
    while checked < 25:
        n_assets = int(rng.integers(1, 4))
        n_scen = int(rng.integers(8, 30))
        n_hours = int(rng.integers(24, 96))
        s = build_random_set(rng, n_assets, n_scen, n_hours)
        alpha = float(rng.choice([0.8, 0.9, 0.95, 1.0]))
        q_max = me.empirical_quantile(
            me.annual_scores(s, 0, np.ones(n_assets)), alpha
        )
        p_c = round(min(0.95, 0.85 * q_max), 2)
        if p_c <= 0.05:
            continue
        rep = st.solve_single(s, 0, me.CfeTarget(p_c=p_c, alpha=alpha))
        _, oracle_cost = orc.grid_search_optimum(s, 0, p_c, alpha, resolution=0.005)
        ratio = rep.hourly_cost / oracle_cost
        worst_ratio = max(worst_ratio, ratio)
        assert ratio <= 1.01, f"instance {checked}: cost ratio {ratio:.5f} > 1.01"
        if alpha >= 1.0:
            feasible, _ = orc.check_feasible_all(s, 0, rep.weights, p_c)
        else:
            q = me.empirical_quantile(me.annual_scores(s, 0, rep.weights), alpha)
            feasible = q >= p_c
        assert feasible, f"instance {checked}: infeasible portfolio returned"
        checked += 1
    elapsed = time.monotonic() - started
    _report(
        "oracle-equivalence",
        checked == 25 and elapsed <= 300,
        f"(25 instances, worst cost ratio {worst_ratio:.5f}, {elapsed:.0f}s)",
    )


def test_toy_analytic_instance(toy_set):
    rep = st.solve_single(toy_set, 0, me.CfeTarget(p_c=0.7, alpha=1.0))
    ok = abs(rep.weights[0] - 0.93333) <= 1e-3 and abs(rep.hourly_cost - 700.0) <= 0.7
    _report(
        "toy-analytic-instance", ok,
        f"(w={rep.weights[0]:.6f}, cost={rep.hourly_cost:.3f})",
    )


def test_calibration_to_study_targets(replica_full):
    started = time.monotonic()
    corr = sc.correlation_matrix(replica_full)
    ids = replica_full.asset_ids + list(replica_full.load_ids)
    i = {name: k for k, name in enumerate(ids)}
    ss = corr[i["sol1"], i["sol2"]]
    ww = corr[i["win1"], i["win2"]]
    sw = max(
        corr[i["sol1"], i["win1"]], corr[i["sol1"], i["win2"]],
        corr[i["sol2"], i["win1"]], corr[i["sol2"], i["win2"]],
    )
    wl = max(corr[i["win1"], i["load"]], corr[i["win2"], i["load"]])
    elapsed = time.monotonic() - started
    ok = (
        abs(ss - 0.91) <= 0.05
        and abs(ww - 0.43) <= 0.05
        and sw < 0
        and wl < 0
        and elapsed <= 120
    )
    _report(
        "correlation-calibration", ok,
        f"(solar-solar {ss:.3f}, wind-wind {ww:.3f}, max solar-wind {sw:.3f}, "
        f"max wind-load {wl:.3f}, {elapsed:.0f}s)",
    )


def test_cost_grid_pattern(replica_full):
    started = time.monotonic()
    grid = an.cost_grid(replica_full, 0, [0.5, 0.7, 0.9, 1.0], [0.5, 0.7, 0.9, 0.95])
    elapsed = time.monotonic() - started
    cost = grid.cost
    assert np.all(np.isfinite(cost)), "grid contains infeasible cells"
    rows_monotone = all(
        cost[i, j + 1] >= cost[i, j] * (1 - 0.005)
        for i in range(4) for j in range(3)
    )
    cols_monotone = all(
        cost[i + 1, j] >= cost[i, j] * (1 - 0.005)
        for i in range(3) for j in range(4)
    )
    alpha_effect = float((cost.max(axis=0) - cost.min(axis=0)).max())
    pc_effect = float((cost.max(axis=1) - cost.min(axis=1)).max())
    ok = rows_monotone and cols_monotone and alpha_effect < pc_effect and elapsed <= 900
    _report(
        "cost-grid-pattern", ok,
        f"(rows monotone {rows_monotone}, cols monotone {cols_monotone}, "
        f"alpha effect {alpha_effect:.2f} < pc effect {pc_effect:.2f}, {elapsed:.0f}s)",
    )


def test_binding_weights(replica_full):
    rep = st.solve_single(replica_full, 0, me.CfeTarget(p_c=0.9, alpha=0.95))
    binding = rep.binding_upper + rep.binding_lower
    _report(
        "binding-weights", len(binding) >= 1,
        f"(bound assets: {binding}, w={np.round(rep.weights, 4).tolist()})",
    )


def test_multi_load_dominance():
    started = time.monotonic()
    assets = [
        sc.SynthAsset(id="solar", kind="solar", capacity=300.0, cost=50.0),
        sc.SynthAsset(id="wind", kind="wind", capacity=250.0, cost=28.0),
        sc.SynthAsset(id="hydro", kind="hydro", capacity=180.0, cost=27.0,
                      capacity_factor=0.8),
    ]
    loads = [
        sc.SynthLoad(id="industrial", base_mw=80.0),
        sc.SynthLoad(id="commercial", base_mw=140.0),
    ]
    corr = np.eye(5)
    corr[0, 1] = corr[1, 0] = -0.4
    corr[0, 3] = corr[3, 0] = corr[0, 4] = corr[4, 0] = 0.15
    corr[1, 3] = corr[3, 1] = corr[1, 4] = corr[4, 1] = -0.2
    universe = sc.synthesize(
        sc.SynthConfig(assets=assets, loads=loads, correlation=corr,
                       n_scenarios=100, n_hours=1008, seed=29)
    )
    specs = [
        st.LoadSpec(load=0, target=me.CfeTarget(p_c=0.9, alpha=0.9), priority=0),
        st.LoadSpec(load=1, target=me.CfeTarget(p_c=0.8, alpha=0.9), priority=1),
    ]
    seq = st.solve_sequential(universe, specs)
    split = st.solve_split(universe, specs)
    joint = st.solve_joint(universe, specs)
    elapsed = time.monotonic() - started
    joint_dominates = (
        joint.total_cost <= split.total_cost * 1.001
        and joint.total_cost <= seq.total_cost * 1.001
    )
    v1 = {m.strategy: m.costs[0] for m in (seq, split, joint)}
    first_load_best = v1["sequential"] <= min(v1.values()) * 1.001
    ok = joint_dominates and first_load_best and elapsed <= 300
    _report(
        "multi-load-dominance", ok,
        f"(totals seq {seq.total_cost:.1f} split {split.total_cost:.1f} "
        f"joint {joint.total_cost:.1f}; v1 {v1}; {elapsed:.0f}s)",
    )


def test_diversification_pattern():
    assets = [
        sc.SynthAsset(id=f"sol{i}", kind="solar", capacity=150.0 + 30 * i, cost=30.0)
        for i in range(3)
    ] + [
        sc.SynthAsset(id=f"win{i}", kind="wind", capacity=120.0 + 25 * i, cost=45.0)
        for i in range(3)
    ] + [
        sc.SynthAsset(id="hyd", kind="hydro", capacity=200.0, cost=80.0,
                      capacity_factor=0.75),
    ]
    corr = np.eye(8)
    for i in range(3):
        for j in range(3):
            if i != j:
                corr[i, j] = 0.85
                corr[3 + i, 3 + j] = 0.4
            corr[i, 3 + j] = corr[3 + j, i] = -0.3
    universe = sc.synthesize(
        sc.SynthConfig(
            assets=assets,
            loads=[sc.SynthLoad(id="load", base_mw=120.0)],
            correlation=corr,
            n_scenarios=30,
            n_hours=672,
            seed=37,
        )
    )
    target = me.CfeTarget(p_c=0.75, alpha=0.9)
    subsets = an.paired_subsets(universe, [1, 2, 3])
    result = an.diversification_sweep(universe, 0, target, subsets, beta=0.95)
    best = {}
    for p in result.points:
        best[p.size] = min(best.get(p.size, np.inf), p.cost_per_mwh_load)
    ok = (
        sorted(best) == [3, 5, 7]
        and best[5] <= best[3] * 1.005
        and best[7] <= best[5] * 1.005
    )
    _report(
        "diversification-pattern", ok,
        "(best cost by size: " + ", ".join(f"{k}: {v:.2f}" for k, v in sorted(best.items())) + ")",
    )


def test_solver_property_suite():
    rng = np.random.default_rng(8)
    # Finite differences against analytic polynomial gradients.
    fd_ok = True
    for _ in range(20):
        a, b, c = rng.uniform(-3, 3, 3)
        w = rng.uniform(-1, 1, 2)

        def f(x):
            return float(a * x[0] ** 3 + b * x[0] * x[1] + c * x[1] ** 2)

        analytic = np.array([3 * a * w[0] ** 2 + b * w[1], b * w[0] + 2 * c * w[1]])
        got = fd_gradient(f, w)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        fd_ok &= bool(np.linalg.norm(got - analytic) / scale <= 1e-5)

    # One representative constrained solve: BFGS PD, merit monotone, box exact.
    problem = NlpProblem(
        dim=3,
        objective=lambda w: float(np.sum(np.exp(w)) + 2 * w[0]),
        constraints=[lambda w: float(0.7 * w[0] + 0.4 * w[1] + 0.5 * w[2] - 0.6)],
        lower=np.zeros(3),
        upper=np.ones(3),
    )
    res = slsqp_solve(problem, np.array([1.0, 1.0, 1.0]))
    bfgs_ok = all(rec.hessian_min_eig >= 1e-8 * 0.99 for rec in res.trace)
    merit_ok = all(rec.merit_after <= rec.merit_before + 1e-9 for rec in res.trace)
    box_ok = all(
        bool(np.all(rec.w >= 0.0) and np.all(rec.w <= 1.0)) for rec in res.trace
    ) and bool(np.all(res.w >= 0.0) and np.all(res.w <= 1.0))
    ok = fd_ok and bfgs_ok and merit_ok and box_ok
    _report(
        "solver-property-suite", ok,
        f"(fd {fd_ok}, bfgs-pd {bfgs_ok}, merit-monotone {merit_ok}, box {box_ok})",
    )


def test_metric_identities(toy_set, tmp_path):
    rng = np.random.default_rng(13)
    s = build_random_set(rng, 2, 6, 48)
    w = rng.uniform(0, 1, 2)
    d = me.annual_scores(s, 0, w)
    min_ok = me.empirical_quantile(d, 1.0) == float(d.scores.min())
    heat_ok = abs(me.hourly_heatmap(s, 0, w).mean() - d.mu) <= 1e-12
    shortfall_ok = all(
        bool(np.all(me.shortfall(s, 0, rng.uniform(0, 1, 2)) <= 1e-12))
        for _ in range(10)
    )

    manifest = sc.save_scenarios(toy_set, tmp_path / "toy")
    out = tmp_path / "rep.json"
    code = cli.main([
        "optimize", "--manifest", str(manifest),
        "--target", "0.7", "--alpha", "1.0", "--out", str(out),
    ])
    client = TestClient(create_app(sc.load_scenarios(manifest)))
    http = client.post(
        "/optimize", json={"load": 0, "target": {"p_c": 0.7, "alpha": 1.0}}
    )
    cli_http_ok = code == 0 and out.read_text() == http.content.decode()
    ok = min_ok and heat_ok and shortfall_ok and cli_http_ok
    _report(
        "metric-identities", ok,
        f"(min {min_ok}, heatmap {heat_ok}, shortfall {shortfall_ok}, "
        f"cli-http {cli_http_ok})",
    )
