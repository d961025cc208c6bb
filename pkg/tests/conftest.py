"""Shared fixtures: the analytic toy instance and small synthetic replicas."""

import numpy as np
import pytest

from cfeport import scenarios as sc


@pytest.fixture
def toy_set():
    """One asset, one scenario, two hours: G=[100, 50] against flat load 100.

    Annual score is 0.75*w for w in [0, 1]; with p_c = 0.7 the optimum is
    w = 14/15 at hourly cost 700.
    """
    return sc.ScenarioSet(
        assets=[sc.AssetSpec(id="a1", kind="other", capacity=100.0, cost=10.0)],
        generation=np.array([[[100.0, 50.0]]]),
        loads=[np.array([[100.0, 100.0]])],
    )


def build_random_set(rng, n_assets, n_scen, n_hours, n_loads=1, cost_range=(10, 60)):
    caps = rng.uniform(50, 150, n_assets)
    generation = rng.uniform(0, 1, (n_assets, n_scen, n_hours)) * caps[:, None, None]
    loads = [rng.uniform(30, 90, (n_scen, n_hours)) for _ in range(n_loads)]
    assets = [
        sc.AssetSpec(
            id=f"a{i}",
            kind="other",
            capacity=float(caps[i]),
            cost=float(rng.uniform(*cost_range)),
        )
        for i in range(n_assets)
    ]
    return sc.ScenarioSet(assets=assets, generation=generation, loads=loads)


def replica_config(n_scenarios=40, n_hours=2184, seed=11, loads=None):
    """Five-entity study universe: 2 solar + 2 wind + deterministic hydro."""
    assets = [
        sc.SynthAsset(id="sol1", kind="solar", capacity=250.0, cost=30.0),
        sc.SynthAsset(id="sol2", kind="solar", capacity=200.0, cost=30.0),
        sc.SynthAsset(id="win1", kind="wind", capacity=89.3, cost=50.0),
        sc.SynthAsset(id="win2", kind="wind", capacity=144.3, cost=60.0),
        sc.SynthAsset(id="hyd", kind="hydro", capacity=123.7, cost=102.0,
                      capacity_factor=97.8 / 123.7),
    ]
    loads = loads or [sc.SynthLoad(id="load", base_mw=150.0)]
    n = len(assets) + len(loads)
    corr = np.eye(n)
    targets = {
        (0, 1): 0.91, (2, 3): 0.43,
        (0, 2): -0.38, (0, 3): -0.39, (1, 2): -0.40, (1, 3): -0.40,
    }
    load_targets = {0: 0.15, 1: 0.15, 2: -0.18, 3: -0.22}
    for (i, j), v in targets.items():
        corr[i, j] = corr[j, i] = v
    for k in range(len(loads)):
        for i, v in load_targets.items():
            corr[i, 5 + k] = corr[5 + k, i] = v
    return sc.SynthConfig(
        assets=assets, loads=loads, correlation=corr,
        n_scenarios=n_scenarios, n_hours=n_hours, seed=seed,
    )


@pytest.fixture(scope="session")
def replica_small():
    """Replica at reduced size for unit tests (acceptance builds the full one)."""
    return sc.synthesize(replica_config(n_scenarios=40, n_hours=2184))
