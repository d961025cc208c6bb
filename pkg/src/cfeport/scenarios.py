"""Joint hourly scenarios of carbon-free generation and load.

Holds the validated scenario container (`ScenarioSet`), manifest/CSV file I/O,
and a correlated synthetic generator used in place of proprietary production
scenarios.  The generator couples all entities through a Gaussian factor with
per-entity marginal transforms (diurnal solar shape with bounded noise,
autocorrelated wind capacity factors, lognormal load noise) and calibrates the
latent correlation so the pooled hourly correlations of the output match the
requested targets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, special

ASSET_KINDS = ("solar", "wind", "hydro", "other")

# Scenarios are drawn in fixed-size blocks so the transient latent arrays stay
# small; the block size is part of the reproducibility contract (same seed,
# same output) and must not be changed casually.
_DRAW_BLOCK = 32

_CSV_FLOAT_FMT = "%.6f"


@dataclass(frozen=True)
class AssetSpec:
    """One procurable CFE source: identity, size, and unit energy cost."""

    id: str
    kind: str
    capacity: float
    cost: float
    deterministic: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("asset id must be a non-empty string")
        if self.kind not in ASSET_KINDS:
            raise ValueError(f"unknown asset kind {self.kind!r}; expected one of {ASSET_KINDS}")
        if not self.capacity > 0:
            raise ValueError(f"asset {self.id}: capacity must be > 0, got {self.capacity}")
        if self.cost < 0:
            raise ValueError(f"asset {self.id}: cost must be >= 0, got {self.cost}")


@dataclass
class ScenarioSet:
    """Generation tensor (assets x scenarios x hours) plus per-customer load matrices.

    Invariants are enforced at construction: generation within [0, capacity]
    per asset, strictly positive loads, consistent (N, T) across entities, and
    scenario-identical series for deterministic assets.
    """

    assets: list[AssetSpec]
    generation: np.ndarray
    loads: list[np.ndarray]
    load_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.generation = np.asarray(self.generation, dtype=float)
        self.loads = [np.asarray(m, dtype=float) for m in self.loads]
        if self.generation.ndim != 3:
            raise ValueError(f"generation must be a 3-d tensor, got shape {self.generation.shape}")
        n_assets, n_scen, n_hours = self.generation.shape
        if len(self.assets) != n_assets:
            raise ValueError(
                f"{len(self.assets)} assets declared but generation has {n_assets} slices"
            )
        ids = [a.id for a in self.assets]
        if len(set(ids)) != len(ids):
            raise ValueError("asset ids must be unique")
        if not self.load_ids:
            self.load_ids = [f"load{k + 1}" for k in range(len(self.loads))]
        if len(self.load_ids) != len(self.loads):
            raise ValueError("load_ids length must match loads")
        for a, gen in zip(self.assets, self.generation):
            if not np.all(np.isfinite(gen)):
                raise ValueError(f"asset {a.id}: generation contains non-finite values")
            if gen.min(initial=0.0) < 0:
                raise ValueError(f"asset {a.id}: negative generation ({gen.min():.6g} MW)")
            # 1e-6 absolute slack absorbs the 6-decimal CSV rounding.
            if gen.max(initial=0.0) > a.capacity * (1 + 1e-9) + 1e-6:
                raise ValueError(
                    f"asset {a.id}: generation {gen.max():.6g} MW exceeds capacity {a.capacity} MW"
                )
            if a.deterministic and n_scen > 1 and not (gen == gen[0]).all():
                raise ValueError(f"asset {a.id} is deterministic but scenarios differ")
        for lid, mat in zip(self.load_ids, self.loads):
            if mat.shape != (n_scen, n_hours):
                raise ValueError(
                    f"load {lid}: shape {mat.shape} does not match generation ({n_scen}, {n_hours})"
                )
            if not np.all(np.isfinite(mat)) or mat.min() <= 0:
                raise ValueError(f"load {lid}: loads must be strictly positive and finite")

    @property
    def n_assets(self) -> int:
        return self.generation.shape[0]

    @property
    def n_scenarios(self) -> int:
        return self.generation.shape[1]

    @property
    def n_hours(self) -> int:
        return self.generation.shape[2]

    @property
    def n_loads(self) -> int:
        return len(self.loads)

    @property
    def asset_ids(self) -> list[str]:
        return [a.id for a in self.assets]

    def load_matrix(self, k: int) -> np.ndarray:
        if not 0 <= k < len(self.loads):
            raise ValueError(f"load index {k} out of range (have {len(self.loads)} loads)")
        return self.loads[k]

    def subset(self, asset_ids) -> "ScenarioSet":
        """New ScenarioSet restricted to the given assets (order preserved as given)."""
        index = {a.id: i for i, a in enumerate(self.assets)}
        missing = [i for i in asset_ids if i not in index]
        if missing:
            raise ValueError(f"unknown asset ids: {missing}")
        rows = [index[i] for i in asset_ids]
        return ScenarioSet(
            assets=[self.assets[r] for r in rows],
            generation=self.generation[rows].copy(),
            loads=[m.copy() for m in self.loads],
            load_ids=list(self.load_ids),
        )

    def with_scaled_load(self, k: int, factor: float) -> "ScenarioSet":
        """Copy with load k multiplied by `factor` in every scenario and hour."""
        if factor <= 0:
            raise ValueError("load scale factor must be positive")
        self.load_matrix(k)
        loads = [m * factor if j == k else m.copy() for j, m in enumerate(self.loads)]
        return ScenarioSet(
            assets=list(self.assets),
            generation=self.generation,
            loads=loads,
            load_ids=list(self.load_ids),
        )


def average_generation(s: ScenarioSet) -> np.ndarray:
    """Mean generation per asset over all scenarios and hours (MW, length I)."""
    return s.generation.mean(axis=(1, 2))


# ---------------------------------------------------------------------------
# Manifest + wide-CSV persistence
# ---------------------------------------------------------------------------

def _read_wide_csv(path: Path, n_hours=None, n_scen=None):
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if any(not c.startswith("s") for c in cols):
            raise ValueError(f"{path}: header must be s1..sN, got {header[:40]!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(cols):
        raise ValueError(f"{path}: {len(cols)} header columns but {data.shape[1]} data columns")
    if n_scen is not None and data.shape[1] != n_scen:
        raise ValueError(f"{path}: expected {n_scen} scenarios, found {data.shape[1]}")
    if n_hours is not None and data.shape[0] != n_hours:
        raise ValueError(f"{path}: expected {n_hours} hours, found {data.shape[0]}")
    return data.T  # (N, T)


def _write_wide_csv(path: Path, matrix: np.ndarray):
    n_scen = matrix.shape[0]
    header = ",".join(f"s{i + 1}" for i in range(n_scen))
    np.savetxt(path, matrix.T, delimiter=",", fmt=_CSV_FLOAT_FMT, header=header, comments="")


def load_scenarios(manifest_path) -> ScenarioSet:
    """Read a manifest JSON plus one wide CSV per entity into a validated ScenarioSet."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = manifest_path.parent
    try:
        n_scen = int(manifest["n_scenarios"])
        n_hours = int(manifest["n_hours"])
        asset_entries = manifest["assets"]
        load_entries = manifest["loads"]
    except KeyError as exc:
        raise ValueError(f"manifest missing required key: {exc}") from exc

    assets, gen_slices = [], []
    for entry in asset_entries:
        spec = AssetSpec(
            id=entry["id"],
            kind=entry["kind"],
            capacity=float(entry["capacity"]),
            cost=float(entry["cost"]),
            deterministic=bool(entry.get("deterministic", False)),
        )
        assets.append(spec)
        gen_slices.append(_read_wide_csv(base / entry["file"], n_hours, n_scen))
    loads, load_ids = [], []
    for entry in load_entries:
        load_ids.append(entry["id"])
        loads.append(_read_wide_csv(base / entry["file"], n_hours, n_scen))
    generation = np.stack(gen_slices) if gen_slices else np.zeros((0, n_scen, n_hours))
    return ScenarioSet(assets=assets, generation=generation, loads=loads, load_ids=load_ids)


def save_scenarios(s: ScenarioSet, out_dir) -> Path:
    """Write manifest + wide CSVs; returns the manifest path.

    Values render with 6 decimal places, so save -> load -> save is
    byte-stable on the CSV representation.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    asset_entries = []
    for a, gen in zip(s.assets, s.generation):
        fname = f"gen_{a.id}.csv"
        _write_wide_csv(out_dir / fname, gen)
        asset_entries.append(
            {
                "id": a.id,
                "kind": a.kind,
                "capacity": a.capacity,
                "cost": a.cost,
                "deterministic": a.deterministic,
                "file": fname,
            }
        )
    load_entries = []
    for lid, mat in zip(s.load_ids, s.loads):
        fname = f"load_{lid}.csv"
        _write_wide_csv(out_dir / fname, mat)
        load_entries.append({"id": lid, "file": fname})
    manifest = {
        "n_scenarios": s.n_scenarios,
        "n_hours": s.n_hours,
        "assets": asset_entries,
        "loads": load_entries,
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

@dataclass
class SynthAsset:
    """Shape parameters for one synthesized asset.

    `capacity_factor` is the mean output fraction: for wind/hydro/other the
    mean capacity factor of the whole series, for solar the mean of the noise
    multiplier applied on top of the clear-sky diurnal profile.
    """

    id: str
    kind: str
    capacity: float
    cost: float
    capacity_factor: float = None
    ar_coeff: float = 0.5          # wind: hour-to-hour persistence of the latent factor
    day_length_swing: float = 4.0  # solar: summer-minus-winter daylight hours
    sharpness: float = 1.2         # solar: exponent on the half-sine daylight arc
    noise_shape: float = 1.2       # first Kumaraswamy shape of the bounded noise
    deterministic: bool = None

    def __post_init__(self):
        if self.deterministic is None:
            self.deterministic = self.kind == "hydro"
        if self.capacity_factor is None:
            self.capacity_factor = {"solar": 0.65, "wind": 0.35}.get(self.kind, 0.75)
        if not 0 < self.capacity_factor < 1:
            raise ValueError(f"asset {self.id}: capacity_factor must lie in (0, 1)")
        if not 0 <= self.ar_coeff < 1:
            raise ValueError(f"asset {self.id}: ar_coeff must lie in [0, 1)")
        self.spec  # validate AssetSpec fields eagerly

    @property
    def spec(self) -> AssetSpec:
        return AssetSpec(
            id=self.id,
            kind=self.kind,
            capacity=self.capacity,
            cost=self.cost,
            deterministic=self.deterministic,
        )


@dataclass
class SynthLoad:
    """Shape parameters for one synthesized load customer."""

    id: str
    base_mw: float
    diurnal_swing: float = 0.10
    seasonal_swing: float = 0.08
    weekend_factor: float = 0.97
    noise_sigma: float = 0.18

    def __post_init__(self):
        if self.base_mw <= 0:
            raise ValueError(f"load {self.id}: base_mw must be positive")
        if self.noise_sigma < 0:
            raise ValueError(f"load {self.id}: noise_sigma must be >= 0")


@dataclass
class SynthConfig:
    """Full recipe for one synthetic scenario universe.

    `correlation` targets the pooled hourly Pearson correlation of the
    realized series, ordered assets-then-loads; rows for deterministic assets
    are ignored.  Identical seeds produce bit-identical output.
    """

    assets: list[SynthAsset]
    loads: list[SynthLoad]
    correlation: np.ndarray = None
    n_scenarios: int = 100
    n_hours: int = 8760
    seed: int = 0
    calibrate: bool = True
    calibration_rounds: int = 3
    calibration_scenarios: int = 24

    def __post_init__(self):
        n = len(self.assets) + len(self.loads)
        if self.correlation is None:
            self.correlation = np.eye(n)
        self.correlation = np.asarray(self.correlation, dtype=float)
        if self.correlation.shape != (n, n):
            raise ValueError(
                f"correlation must be {(n, n)} for {len(self.assets)} assets + "
                f"{len(self.loads)} loads, got {self.correlation.shape}"
            )
        if not np.allclose(self.correlation, self.correlation.T, atol=1e-10):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(self.correlation), 1.0, atol=1e-10):
            raise ValueError("correlation matrix must have unit diagonal")
        if np.abs(self.correlation).max() > 1 + 1e-10:
            raise ValueError("correlation entries must lie in [-1, 1]")
        if self.n_scenarios < 1 or self.n_hours < 1:
            raise ValueError("n_scenarios and n_hours must be >= 1")
        ids = [a.id for a in self.assets] + [l.id for l in self.loads]
        if len(set(ids)) != len(ids):
            raise ValueError("entity ids must be unique across assets and loads")

    @property
    def entity_ids(self) -> list[str]:
        return [a.id for a in self.assets] + [l.id for l in self.loads]

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path) as fh:
            raw = json.load(fh)
        assets = [SynthAsset(**e) for e in raw["assets"]]
        loads = [SynthLoad(**e) for e in raw["loads"]]
        corr = raw.get("correlation")
        matrix = None
        if corr is not None:
            order = corr.get("entities")
            matrix = np.asarray(corr["matrix"], dtype=float)
            if order is not None:
                want = [a.id for a in assets] + [l.id for l in loads]
                if sorted(order) != sorted(want):
                    raise ValueError("correlation entities do not match declared assets/loads")
                perm = [order.index(i) for i in want]
                matrix = matrix[np.ix_(perm, perm)]
        kwargs = {
            k: raw[k]
            for k in ("n_scenarios", "n_hours", "seed", "calibrate", "calibration_rounds")
            if k in raw
        }
        return cls(assets=assets, loads=loads, correlation=matrix, **kwargs)


def nearest_psd_correlation(matrix, eig_floor=1e-8, max_frobenius=0.1, reject=True):
    """Clip negative eigenvalues and renormalize the diagonal to 1.

    Raises when the Frobenius distance of the repair exceeds `max_frobenius`
    and `reject` is set.
    """
    matrix = np.asarray(matrix, dtype=float)
    sym = 0.5 * (matrix + matrix.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() >= eig_floor:
        return sym
    repaired = (vecs * np.maximum(vals, eig_floor)) @ vecs.T
    d = np.sqrt(np.diag(repaired))
    repaired = repaired / np.outer(d, d)
    np.fill_diagonal(repaired, 1.0)
    dist = float(np.linalg.norm(repaired - sym))
    if reject and dist > max_frobenius:
        raise ValueError(
            f"correlation matrix is not PSD and repair distance {dist:.3g} exceeds "
            f"tolerance {max_frobenius}"
        )
    return repaired


def solar_profile(n_hours, day_length_swing=4.0, sharpness=1.2):
    """Clear-sky diurnal/seasonal shape in [0, 1]; exactly 0 outside daylight."""
    t = np.arange(n_hours)
    day = t // 24
    hour = t % 24 + 0.5
    day_length = 12.0 + 0.5 * day_length_swing * np.cos(2 * np.pi * (day - 172) / 365.0)
    sunrise = 12.0 - day_length / 2
    x = (hour - sunrise) / day_length
    profile = np.zeros(n_hours)
    up = (x > 0) & (x < 1)
    profile[up] = np.sin(np.pi * x[up]) ** sharpness
    return profile


def load_profile(n_hours, diurnal_swing=0.10, seasonal_swing=0.08, weekend_factor=0.97):
    """Deterministic load shape: afternoon diurnal peak, summer seasonal peak, weekend dip."""
    t = np.arange(n_hours)
    day = t // 24
    hour = t % 24 + 0.5
    shape = 1.0 - diurnal_swing * np.cos(2 * np.pi * (hour - 15.5) / 24.0)
    shape *= 1.0 + seasonal_swing * np.cos(2 * np.pi * (day - 200) / 365.0)
    shape *= np.where(day % 7 >= 5, weekend_factor, 1.0)
    return shape


def _kumaraswamy_b(a, mean):
    """Second shape parameter matching the requested mean for Kumaraswamy(a, b)."""

    def moment(b):
        return b * special.beta(1 + 1.0 / a, b) - mean

    return optimize.brentq(moment, 1e-4, 1e4, xtol=1e-12)


def _kumaraswamy_ppf(u, a, b):
    return (1.0 - (1.0 - u) ** (1.0 / b)) ** (1.0 / a)


class _EntityModel:
    """Marginal transform of one entity's latent standard-normal field."""

    def __init__(self, entity, n_hours):
        self.entity = entity
        if isinstance(entity, SynthLoad):
            self.is_load = True
            self.profile = load_profile(
                n_hours, entity.diurnal_swing, entity.seasonal_swing, entity.weekend_factor
            )
            self.mask = np.ones(n_hours, dtype=bool)
            self.stochastic = True
            return
        self.is_load = False
        if entity.kind == "solar":
            self.profile = solar_profile(n_hours, entity.day_length_swing, entity.sharpness)
        else:
            self.profile = np.ones(n_hours)
        self.mask = self.profile > 0
        self.stochastic = not entity.deterministic
        if self.stochastic:
            a = entity.noise_shape
            self.noise_params = (a, _kumaraswamy_b(a, entity.capacity_factor))

    def transform(self, latent):
        """Map latent (N, T) standard normals to MW series."""
        e = self.entity
        if self.is_load:
            sigma = e.noise_sigma
            noise = np.exp(sigma * latent - 0.5 * sigma * sigma)
            return e.base_mw * self.profile * noise
        if not self.stochastic:
            n_scen = latent.shape[0]
            series = e.capacity * e.capacity_factor * self.profile
            return np.broadcast_to(series, (n_scen, series.size)).copy()
        z = latent
        if e.kind == "wind" and e.ar_coeff > 0:
            z = _ar_filter(latent, e.ar_coeff)
        u = special.ndtr(z)
        noise = _kumaraswamy_ppf(u, *self.noise_params)
        return e.capacity * self.profile * noise


def _ar_filter(z, phi):
    """AR(1) filter preserving the standard-normal marginal at every hour."""
    w = np.empty_like(z)
    w[:, 0] = z[:, 0]
    scale = math.sqrt(1.0 - phi * phi)
    for t in range(1, z.shape[1]):
        w[:, t] = phi * w[:, t - 1] + scale * z[:, t]
    return w


def pooled_correlation(x, y, mask=None):
    """Pearson correlation over the pooled (scenario, hour) sample.

    `mask` restricts to hours where both entities are active; returns NaN when
    fewer than 2 pooled samples remain or either side is constant.
    """
    if mask is not None:
        x = x[:, mask]
        y = y[:, mask]
    xf = x.ravel()
    yf = y.ravel()
    if xf.size < 2:
        return float("nan")
    sx = xf.std()
    sy = yf.std()
    if sx == 0 or sy == 0:
        return float("nan")
    return float(np.corrcoef(xf, yf)[0, 1])


def correlation_matrix(s: ScenarioSet) -> np.ndarray:
    """Pooled hourly correlations between all entities (assets then loads).

    Hours where an entity is identically zero across scenarios (solar nights)
    are excluded pairwise, mirroring how the synthesis targets are calibrated.
    """
    series = [s.generation[i] for i in range(s.n_assets)] + list(s.loads)
    masks = [np.any(m != 0, axis=0) for m in series]
    n = len(series)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            joint = masks[i] & masks[j]
            out[i, j] = out[j, i] = pooled_correlation(series[i], series[j], joint)
    return out


def _draw_series(models, latent_corr, stoch_idx, n_scen, n_hours, seed_key):
    """Deterministically draw every entity's (N, T) series."""
    n_stoch = len(stoch_idx)
    chol = np.linalg.cholesky(nearest_psd_correlation(latent_corr, reject=False))
    rng = np.random.default_rng(seed_key)
    series = [np.empty((n_scen, n_hours)) for _ in models]
    col_of = {e: c for c, e in enumerate(stoch_idx)}
    for start in range(0, n_scen, _DRAW_BLOCK):
        stop = min(start + _DRAW_BLOCK, n_scen)
        block = stop - start
        z = rng.standard_normal((block, n_hours, n_stoch)) @ chol.T
        for e, model in enumerate(models):
            latent = z[:, :, col_of[e]] if model.stochastic else np.zeros((block, n_hours))
            series[e][start:stop] = model.transform(latent)
    return series


def synthesize(config: SynthConfig) -> ScenarioSet:
    """Generate a fully coupled ScenarioSet from shape parameters and correlation targets.

    The latent Gaussian correlation starts at the target matrix and is nudged
    over a few short calibration draws until the pooled hourly correlation of
    the realized series lands on target; the final draw then runs at full size
    with a seed independent of the calibration draws.
    """
    models = [_EntityModel(a, config.n_hours) for a in config.assets] + [
        _EntityModel(l, config.n_hours) for l in config.loads
    ]
    stoch_idx = [e for e, m in enumerate(models) if m.stochastic]
    if not stoch_idx and config.n_scenarios > 1:
        pass  # all-deterministic universes are legal; scenarios repeat
    # Validate the user-facing target matrix up front (hard reject if badly non-PSD).
    target = nearest_psd_correlation(config.correlation, reject=True)
    latent = target[np.ix_(stoch_idx, stoch_idx)].copy() if stoch_idx else np.zeros((0, 0))

    pairs = [(i, j) for ai, i in enumerate(stoch_idx) for j in stoch_idx[ai + 1:]]
    if config.calibrate and pairs and config.n_scenarios * config.n_hours > 1:
        n_cal = min(config.n_scenarios, config.calibration_scenarios)
        for round_ in range(config.calibration_rounds):
            series = _draw_series(
                models, latent, stoch_idx, n_cal, config.n_hours,
                [config.seed, 1000 + round_],
            )
            for i, j in pairs:
                joint = models[i].mask & models[j].mask
                measured = pooled_correlation(series[i], series[j], joint)
                if not np.isfinite(measured):
                    continue
                ci, cj = stoch_idx.index(i), stoch_idx.index(j)
                adjusted = np.clip(latent[ci, cj] + (target[i, j] - measured), -0.97, 0.97)
                latent[ci, cj] = latent[cj, ci] = adjusted
            latent = nearest_psd_correlation(latent, reject=False)

    series = _draw_series(
        models, latent, stoch_idx, config.n_scenarios, config.n_hours, [config.seed, 0]
    )
    n_assets = len(config.assets)
    generation = np.stack(series[:n_assets]) if n_assets else np.zeros(
        (0, config.n_scenarios, config.n_hours)
    )
    return ScenarioSet(
        assets=[a.spec for a in config.assets],
        generation=generation,
        loads=series[n_assets:],
        load_ids=[l.id for l in config.loads],
    )
