"""Scenario container, manifest I/O, and the synthetic generator."""

import json

import numpy as np
import pytest

from cfeport import scenarios as sc
from conftest import replica_config


def write_toy_manifest(tmp_path, gen_rows, load_rows, capacity=100.0, cost=10.0):
    n_hours = len(gen_rows)
    n_scen = len(gen_rows[0])
    gen_csv = tmp_path / "gen_a1.csv"
    load_csv = tmp_path / "load_l1.csv"
    header = ",".join(f"s{i + 1}" for i in range(n_scen))
    gen_csv.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in gen_rows) + "\n")
    load_csv.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in load_rows) + "\n")
    manifest = {
        "n_scenarios": n_scen,
        "n_hours": n_hours,
        "assets": [
            {"id": "a1", "kind": "other", "capacity": capacity, "cost": cost,
             "file": "gen_a1.csv"}
        ],
        "loads": [{"id": "l1", "file": "load_l1.csv"}],
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


class TestLoadScenarios:
    def test_toy_manifest_round_trip(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[100.0], [50.0]], [[100.0], [100.0]])
        s = sc.load_scenarios(path)
        assert s.n_assets == 1 and s.n_scenarios == 1 and s.n_hours == 2
        assert sc.average_generation(s) == pytest.approx([75.0])

    def test_negative_generation_rejected(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[-1.0], [50.0]], [[100.0], [100.0]])
        with pytest.raises(ValueError, match="negative generation"):
            sc.load_scenarios(path)

    def test_generation_above_capacity_rejected(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[150.0], [50.0]], [[100.0], [100.0]])
        with pytest.raises(ValueError, match="exceeds capacity"):
            sc.load_scenarios(path)

    def test_nonpositive_load_rejected(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[100.0], [50.0]], [[0.0], [100.0]])
        with pytest.raises(ValueError, match="strictly positive"):
            sc.load_scenarios(path)

    def test_missing_file(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[100.0], [50.0]], [[100.0], [100.0]])
        (tmp_path / "gen_a1.csv").unlink()
        with pytest.raises(FileNotFoundError):
            sc.load_scenarios(path)

    def test_dimension_mismatch_across_files(self, tmp_path):
        path = write_toy_manifest(tmp_path, [[100.0], [50.0]], [[100.0]])
        with pytest.raises(ValueError, match="expected 2 hours"):
            sc.load_scenarios(path)

    def test_save_load_save_is_byte_stable(self, tmp_path):
        config = replica_config(n_scenarios=3, n_hours=96)
        s = sc.synthesize(config)
        first = sc.save_scenarios(s, tmp_path / "one")
        loaded = sc.load_scenarios(first)
        second = sc.save_scenarios(loaded, tmp_path / "two")
        for f in sorted(p.name for p in first.parent.iterdir()):
            assert (first.parent / f).read_bytes() == (second.parent / f).read_bytes()


class TestScenarioSetInvariants:
    def test_duplicate_ids_rejected(self):
        a = sc.AssetSpec(id="x", kind="solar", capacity=10, cost=5)
        with pytest.raises(ValueError, match="unique"):
            sc.ScenarioSet(assets=[a, a], generation=np.zeros((2, 1, 2)),
                           loads=[np.ones((1, 2))])

    def test_deterministic_asset_must_repeat(self):
        a = sc.AssetSpec(id="h", kind="hydro", capacity=10, cost=5, deterministic=True)
        gen = np.array([[[1.0, 1.0], [2.0, 2.0]]])
        with pytest.raises(ValueError, match="deterministic"):
            sc.ScenarioSet(assets=[a], generation=gen, loads=[np.ones((2, 2))])

    def test_load_shape_must_match(self):
        a = sc.AssetSpec(id="x", kind="wind", capacity=10, cost=5)
        with pytest.raises(ValueError, match="does not match"):
            sc.ScenarioSet(assets=[a], generation=np.zeros((1, 2, 3)),
                           loads=[np.ones((2, 2))])

    def test_asset_validation(self):
        with pytest.raises(ValueError, match="capacity"):
            sc.AssetSpec(id="x", kind="wind", capacity=0, cost=5)
        with pytest.raises(ValueError, match="cost"):
            sc.AssetSpec(id="x", kind="wind", capacity=1, cost=-1)
        with pytest.raises(ValueError, match="kind"):
            sc.AssetSpec(id="x", kind="coal", capacity=1, cost=5)

    def test_subset_and_scaled_load(self, replica_small):
        sub = replica_small.subset(["win1", "hyd"])
        assert sub.asset_ids == ["win1", "hyd"]
        assert sub.n_scenarios == replica_small.n_scenarios
        scaled = replica_small.with_scaled_load(0, 1.5)
        assert np.allclose(scaled.loads[0], replica_small.loads[0] * 1.5)
        with pytest.raises(ValueError, match="unknown asset"):
            replica_small.subset(["nope"])


class TestAverageGeneration:
    def test_two_hour_mean(self, toy_set):
        assert sc.average_generation(toy_set) == pytest.approx([75.0])

    def test_deterministic_hydro_level(self):
        cap, level = 123.7, 97.8
        config = replica_config(n_scenarios=4, n_hours=48)
        s = sc.synthesize(config)
        hyd = s.asset_ids.index("hyd")
        assert sc.average_generation(s)[hyd] == pytest.approx(level, abs=1e-9)
        assert s.assets[hyd].capacity == cap

    def test_all_zero_asset(self):
        a = sc.AssetSpec(id="z", kind="other", capacity=10, cost=5)
        s = sc.ScenarioSet(assets=[a], generation=np.zeros((1, 2, 3)),
                           loads=[np.ones((2, 3))])
        assert sc.average_generation(s) == pytest.approx([0.0])

    def test_linearity_under_scaling(self, replica_small):
        gbar = sc.average_generation(replica_small)
        scaled = sc.ScenarioSet(
            assets=[
                sc.AssetSpec(id=a.id, kind=a.kind, capacity=a.capacity, cost=a.cost,
                             deterministic=a.deterministic)
                for a in replica_small.assets
            ],
            generation=0.5 * replica_small.generation,
            loads=[m.copy() for m in replica_small.loads],
        )
        assert sc.average_generation(scaled) == pytest.approx(0.5 * gbar)


class TestSynthesize:
    def test_two_solar_correlation_target(self):
        corr = np.array([[1.0, 0.91], [0.91, 1.0]])
        config = sc.SynthConfig(
            assets=[
                sc.SynthAsset(id="s1", kind="solar", capacity=100, cost=30),
                sc.SynthAsset(id="s2", kind="solar", capacity=80, cost=30),
            ],
            loads=[],
            correlation=corr,
            n_scenarios=200,
            n_hours=8760,
            seed=3,
        )
        s = sc.synthesize(config)
        measured = sc.correlation_matrix(s)[0, 1]
        assert abs(measured - 0.91) <= 0.05

    def test_solar_is_zero_at_night(self):
        config = sc.SynthConfig(
            assets=[sc.SynthAsset(id="s1", kind="solar", capacity=100, cost=30)],
            loads=[sc.SynthLoad(id="l", base_mw=50)],
            n_scenarios=5,
            n_hours=240,
            seed=1,
        )
        s = sc.synthesize(config)
        profile = sc.solar_profile(240)
        night = profile == 0
        assert night.any()
        assert np.all(s.generation[0][:, night] == 0.0)
        day = ~night
        assert s.generation[0][:, day].max() > 0

    def test_same_seed_bit_identical(self):
        config = replica_config(n_scenarios=6, n_hours=240)
        a = sc.synthesize(config)
        b = sc.synthesize(replica_config(n_scenarios=6, n_hours=240))
        assert np.array_equal(a.generation, b.generation)
        assert all(np.array_equal(x, y) for x, y in zip(a.loads, b.loads))

    def test_different_seed_differs(self):
        a = sc.synthesize(replica_config(n_scenarios=4, n_hours=240, seed=1))
        b = sc.synthesize(replica_config(n_scenarios=4, n_hours=240, seed=2))
        assert not np.array_equal(a.generation, b.generation)

    def test_generation_respects_bounds(self, replica_small):
        for a, gen in zip(replica_small.assets, replica_small.generation):
            assert gen.min() >= 0.0
            assert gen.max() <= a.capacity * (1 + 1e-9)
        for load in replica_small.loads:
            assert load.min() > 0

    def test_replica_signed_structure(self, replica_small):
        c = sc.correlation_matrix(replica_small)
        ids = replica_small.asset_ids + list(replica_small.load_ids)
        i = {name: k for k, name in enumerate(ids)}
        assert c[i["sol1"], i["sol2"]] > 0.5
        assert c[i["win1"], i["win2"]] > 0.1
        assert c[i["sol1"], i["win1"]] < 0
        assert c[i["win1"], i["load"]] < 0


class TestSynthConfigValidation:
    def test_asymmetric_rejected(self):
        corr = np.array([[1.0, 0.5], [0.4, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            sc.SynthConfig(
                assets=[sc.SynthAsset(id="w", kind="wind", capacity=10, cost=5)],
                loads=[sc.SynthLoad(id="l", base_mw=10)],
                correlation=corr,
            )

    def test_non_psd_beyond_repair_rejected(self):
        corr = np.array([[1.0, 0.99, -0.99], [0.99, 1.0, 0.99], [-0.99, 0.99, 1.0]])
        config = sc.SynthConfig(
            assets=[
                sc.SynthAsset(id="w1", kind="wind", capacity=10, cost=5),
                sc.SynthAsset(id="w2", kind="wind", capacity=10, cost=5),
            ],
            loads=[sc.SynthLoad(id="l", base_mw=10)],
            correlation=corr,
            n_scenarios=2,
            n_hours=48,
        )
        with pytest.raises(ValueError, match="repair distance"):
            sc.synthesize(config)

    def test_nearest_psd_repairs_mild_violations(self):
        corr = np.array([[1.0, 0.7, 0.0], [0.7, 1.0, 0.71], [0.0, 0.71, 1.0]])
        repaired = sc.nearest_psd_correlation(corr)
        vals = np.linalg.eigvalsh(repaired)
        assert vals.min() >= 0
        assert np.allclose(np.diag(repaired), 1.0)

    def test_config_json_round_trip(self, tmp_path):
        config = replica_config(n_scenarios=3, n_hours=48)
        raw = {
            "n_scenarios": config.n_scenarios,
            "n_hours": config.n_hours,
            "seed": config.seed,
            "assets": [
                {"id": a.id, "kind": a.kind, "capacity": a.capacity, "cost": a.cost,
                 "capacity_factor": a.capacity_factor}
                for a in config.assets
            ],
            "loads": [{"id": l.id, "base_mw": l.base_mw} for l in config.loads],
            "correlation": {
                "entities": config.entity_ids,
                "matrix": config.correlation.tolist(),
            },
        }
        path = tmp_path / "synth.json"
        path.write_text(json.dumps(raw))
        parsed = sc.SynthConfig.from_json(path)
        assert parsed.entity_ids == config.entity_ids
        assert np.allclose(parsed.correlation, config.correlation)
        assert np.array_equal(
            sc.synthesize(parsed).generation, sc.synthesize(config).generation
        )
