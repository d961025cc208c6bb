"""HTTP service exposing the structurer over a loaded scenario universe.

The app is stateless apart from the immutable ScenarioSet it was started
with.  Solver work runs on a bounded thread pool (admission limit, FIFO
queue) under a wall-clock budget; requests that outlive the budget get a
504-style payload while infeasible targets get a structured 200 payload,
since infeasibility is an answer, not a transport failure.

The CLI calls the same `handle_*` functions directly, which is what makes
CLI and HTTP outputs identical for identical inputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .errors import InfeasibleError
from .metrics import CfeTarget, hourly_heatmap
from .scenarios import ScenarioSet, average_generation
from .schemas import (
    AssetModel,
    CostGridModel,
    GridRequest,
    HeatmapResponse,
    InfeasiblePayload,
    MultiLoadReportModel,
    MultiloadRequest,
    OptimizeRequest,
    SolveReportModel,
    TimeoutPayload,
    UniverseResponse,
    WindowResponse,
)
from .serialize import dumps
from .structurer import (
    LoadSpec,
    solve_joint,
    solve_sequential,
    solve_single,
    solve_split,
)
from . import analysis


@dataclass
class ServiceSettings:
    time_budget_seconds: float = 300.0
    max_workers: int = None
    precision: str = "sig6"

    def __post_init__(self):
        if self.max_workers is None:
            self.max_workers = max(1, (os.cpu_count() or 2) // 2)


def _bounds_tuple(bounds, n_assets):
    if bounds is None:
        return None
    lo = np.broadcast_to(np.asarray(bounds.lower, dtype=float), (n_assets,))
    hi = np.broadcast_to(np.asarray(bounds.upper, dtype=float), (n_assets,))
    return lo, hi


def universe_payload(s: ScenarioSet) -> UniverseResponse:
    gbar = average_generation(s)
    return UniverseResponse(
        assets=[
            AssetModel(
                id=a.id,
                kind=a.kind,
                capacity=a.capacity,
                cost=a.cost,
                deterministic=a.deterministic,
                avg_generation=float(g),
            )
            for a, g in zip(s.assets, gbar)
        ],
        load_ids=list(s.load_ids),
        n_scenarios=s.n_scenarios,
        n_hours=s.n_hours,
    )


def handle_optimize(s: ScenarioSet, req: OptimizeRequest) -> SolveReportModel:
    target = CfeTarget(p_c=req.target.p_c, alpha=req.target.alpha)
    bounds = _bounds_tuple(req.bounds, s.n_assets)
    return SolveReportModel.from_report(solve_single(s, req.load, target, bounds))


def handle_multiload(s: ScenarioSet, req: MultiloadRequest) -> MultiLoadReportModel:
    specs = [
        LoadSpec(load=e.load, target=CfeTarget(p_c=e.target.p_c, alpha=e.target.alpha),
                 priority=e.priority)
        for e in req.loads
    ]
    bounds = _bounds_tuple(req.bounds, s.n_assets)
    solver = {"sequential": solve_sequential, "split": solve_split, "joint": solve_joint}[
        req.strategy
    ]
    return MultiLoadReportModel.from_report(solver(s, specs, bounds=bounds))


def handle_grid(s: ScenarioSet, req: GridRequest) -> CostGridModel:
    bounds = _bounds_tuple(req.bounds, s.n_assets)
    grid = analysis.cost_grid(s, req.load, req.alphas, req.pcs, bounds)
    return CostGridModel.from_grid(grid)


def handle_heatmap(s: ScenarioSet, load: int, weights) -> HeatmapResponse:
    w = np.asarray(weights, dtype=float)
    if w.size != s.n_assets:
        raise ValueError(f"expected {s.n_assets} weights, got {w.size}")
    matrix = hourly_heatmap(s, load, w)
    return HeatmapResponse(
        load=load, hours=matrix.shape[0], days=matrix.shape[1],
        values=[list(row) for row in matrix],
    )


def handle_window(s: ScenarioSet, load: int, weights, scenario: int, day: int,
                  days: int) -> WindowResponse:
    """Per-hour weighted generation and load for a contiguous day window."""
    w = np.asarray(weights, dtype=float)
    if w.size != s.n_assets:
        raise ValueError(f"expected {s.n_assets} weights, got {w.size}")
    if not 0 <= scenario < s.n_scenarios:
        raise ValueError(f"scenario index {scenario} out of range")
    total_days = s.n_hours // 24
    if not 1 <= days <= 14:
        raise ValueError("window length must be 1..14 days")
    if not 0 <= day < total_days or day + days > total_days:
        raise ValueError(f"day window [{day}, {day + days}) out of range")
    t0, t1 = day * 24, (day + days) * 24
    series = w[:, None] * s.generation[:, scenario, t0:t1]
    return WindowResponse(
        load=load,
        scenario=scenario,
        day=day,
        days=days,
        asset_ids=s.asset_ids,
        series=[list(row) for row in series],
        portfolio=list(series.sum(axis=0)),
        load_mw=list(s.load_matrix(load)[scenario, t0:t1]),
    )


def create_app(scenario_set: ScenarioSet, settings: ServiceSettings = None,
               static_dir=None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="cfeport", version="0.1.0")
    app.state.universe = scenario_set
    app.state.settings = settings
    app.state.executor = ThreadPoolExecutor(max_workers=settings.max_workers)

    def render(model, status_code: int = 200) -> Response:
        return Response(
            content=dumps(model, settings.precision),
            status_code=status_code,
            media_type="application/json",
        )

    def run_guarded(fn):
        """Run a solve on the admission pool under the wall-clock budget."""
        future = app.state.executor.submit(fn)
        try:
            return render(future.result(timeout=settings.time_budget_seconds))
        except FutureTimeout:
            future.cancel()
            return render(
                TimeoutPayload(
                    detail="solve exceeded the configured wall-clock budget",
                    budget_seconds=settings.time_budget_seconds,
                ),
                status_code=504,
            )
        except InfeasibleError as exc:
            return render(
                InfeasiblePayload(
                    detail=str(exc),
                    max_attainable_quantile=exc.max_attainable,
                    load=exc.load,
                )
            )
        except ValueError as exc:
            return JSONResponse(
                status_code=400,
                content={"status": "invalid", "errors": [{"field": "", "message": str(exc)}]},
            )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {
                "field": ".".join(str(p) for p in err["loc"][1:]) or str(err["loc"][0]),
                "message": err["msg"],
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"status": "invalid", "errors": errors})

    @app.get("/universe")
    def universe():
        return render(universe_payload(app.state.universe))

    @app.post("/optimize")
    def optimize(req: OptimizeRequest):
        return run_guarded(lambda: handle_optimize(app.state.universe, req))

    @app.post("/multiload")
    def multiload(req: MultiloadRequest):
        return run_guarded(lambda: handle_multiload(app.state.universe, req))

    @app.post("/grid")
    def grid(req: GridRequest):
        return run_guarded(lambda: handle_grid(app.state.universe, req))

    def _parse_weights(raw: str):
        return [float(v) for v in raw.split(",") if v != ""]

    _weights_error = JSONResponse(
        status_code=400,
        content={
            "status": "invalid",
            "errors": [{"field": "weights", "message": "expected comma-separated floats"}],
        },
    )

    @app.get("/heatmap")
    def heatmap(load: int = Query(0), weights: str = Query(...)):
        try:
            w = _parse_weights(weights)
        except ValueError:
            return _weights_error
        return run_guarded(lambda: handle_heatmap(app.state.universe, load, w))

    @app.get("/window")
    def window(load: int = Query(0), weights: str = Query(...),
               scenario: int = Query(0), day: int = Query(0), days: int = Query(2)):
        try:
            w = _parse_weights(weights)
        except ValueError:
            return _weights_error
        return run_guarded(
            lambda: handle_window(app.state.universe, load, w, scenario, day, days)
        )

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
