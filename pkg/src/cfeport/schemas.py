"""Pydantic request/response models for the HTTP service.

Response models mirror the core report dataclasses field-for-field; both the
service and the CLI render them through `serialize.dumps`, which is what keeps
the two output paths byte-identical.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, field_validator

from .analysis import CostGrid
from .structurer import MarginalResult, MultiLoadReport, SolveReport


class TargetModel(BaseModel):
    p_c: float = Field(gt=0, le=1, description="annual CFE target score")
    alpha: float = Field(gt=0, le=1, description="probability the target must hold with")


class BoundsModel(BaseModel):
    lower: list[float] | float = 0.0
    upper: list[float] | float = 1.0


class OptimizeRequest(BaseModel):
    load: int = 0
    target: TargetModel
    bounds: Optional[BoundsModel] = None


class LoadTargetModel(BaseModel):
    load: int
    target: TargetModel
    priority: int = 0


class MultiloadRequest(BaseModel):
    strategy: str
    loads: list[LoadTargetModel]
    bounds: Optional[BoundsModel] = None

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, v):
        if v not in ("sequential", "split", "joint"):
            raise ValueError("strategy must be sequential, split, or joint")
        return v

    @field_validator("loads")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one load is required")
        return v


class GridRequest(BaseModel):
    load: int = 0
    alphas: list[float]
    pcs: list[float]
    bounds: Optional[BoundsModel] = None

    @field_validator("alphas", "pcs")
    @classmethod
    def _nonempty_axis(cls, v):
        if not v:
            raise ValueError("grid axes must be nonempty")
        return v


class AssetModel(BaseModel):
    id: str
    kind: str
    capacity: float
    cost: float
    deterministic: bool
    avg_generation: float


class UniverseResponse(BaseModel):
    assets: list[AssetModel]
    load_ids: list[str]
    n_scenarios: int
    n_hours: int


class SolveReportModel(BaseModel):
    load: int
    p_c: float
    alpha: float
    asset_ids: list[str]
    weights: list[float]
    upper_bounds: list[float]
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

    @classmethod
    def from_report(cls, rep: SolveReport) -> "SolveReportModel":
        return cls(
            load=rep.load,
            p_c=rep.target.p_c,
            alpha=rep.target.alpha,
            asset_ids=rep.asset_ids,
            weights=list(rep.weights),
            upper_bounds=list(rep.upper_bounds),
            hourly_cost=rep.hourly_cost,
            cost_per_mwh_load=rep.cost_per_mwh_load,
            achieved_quantile=rep.achieved_quantile,
            mean_score=rep.mean_score,
            over_procurement=rep.over_procurement,
            binding_lower=rep.binding_lower,
            binding_upper=rep.binding_upper,
            quantile_active=rep.quantile_active,
            status=rep.status,
            iterations=rep.iterations,
        )


class MultiLoadReportModel(BaseModel):
    strategy: str
    reports: list[SolveReportModel]
    costs: list[float]
    total_cost: float

    @classmethod
    def from_report(cls, rep: MultiLoadReport) -> "MultiLoadReportModel":
        return cls(
            strategy=rep.strategy,
            reports=[SolveReportModel.from_report(r) for r in rep.reports],
            costs=list(rep.costs),
            total_cost=rep.total_cost,
        )


class CostGridModel(BaseModel):
    alphas: list[float]
    pcs: list[float]
    cost: list[list[Optional[float]]]
    status: list[list[str]]

    @classmethod
    def from_grid(cls, grid: CostGrid) -> "CostGridModel":
        cost = [[None if c != c else float(c) for c in row] for row in grid.cost]
        return cls(
            alphas=list(grid.alphas),
            pcs=list(grid.pcs),
            cost=cost,
            status=grid.status,
        )


class MarginalModel(BaseModel):
    asset_ids: list[str]
    shares: list[float]
    dw_deps: list[float]
    epsilon: float
    base: SolveReportModel
    bumped: SolveReportModel

    @classmethod
    def from_result(cls, res: MarginalResult) -> "MarginalModel":
        return cls(
            asset_ids=res.base.asset_ids,
            shares=list(res.shares),
            dw_deps=list(res.dw_deps),
            epsilon=res.epsilon,
            base=SolveReportModel.from_report(res.base),
            bumped=SolveReportModel.from_report(res.bumped),
        )


class HeatmapResponse(BaseModel):
    load: int
    hours: int
    days: int
    values: list[list[float]]


class WindowResponse(BaseModel):
    """Weighted per-asset generation and load for one scenario/day window."""

    load: int
    scenario: int
    day: int
    days: int
    asset_ids: list[str]
    series: list[list[float]]  # per asset, MW contributed (weight * generation)
    portfolio: list[float]
    load_mw: list[float]


class InfeasiblePayload(BaseModel):
    status: str = "infeasible"
    detail: str
    max_attainable_quantile: Optional[float] = None
    load: Optional[int] = None


class TimeoutPayload(BaseModel):
    status: str = "timeout"
    detail: str
    budget_seconds: float
