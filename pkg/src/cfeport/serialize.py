"""Deterministic report serialization shared by the CLI, the HTTP service,
and the analysis emitters.

JSON numbers render at 6 significant digits by default so repeated runs
produce stable golden files; pass precision="full" for repr-exact floats.
Field order follows dataclass declaration order, never alphabetical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .analysis import CostGrid, DiversificationResult
from .structurer import MarginalResult, MultiLoadReport, SolveReport


def _round_sig(x: float, digits: int = 6):
    if not math.isfinite(x):
        return None
    if x == 0:
        return 0.0
    return float(f"{x:.{digits}g}")


def to_jsonable(obj, precision: str = "sig6"):
    """Recursively convert reports/arrays/dataclasses to JSON-ready values."""
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if precision == "full":
            return x if math.isfinite(x) else None
        return _round_sig(x)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v, precision) for v in obj.tolist()]
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(), precision)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name), precision)
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(key): to_jsonable(val, precision) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, precision) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, precision: str = "sig6") -> str:
    return json.dumps(to_jsonable(obj, precision), indent=2) + "\n"


def write_json(obj, path, precision: str = "sig6") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, precision))
    return path


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_grid_csv(grid: CostGrid, path) -> Path:
    header = ["alpha"] + [f"pc_{_fmt(p)}" for p in grid.pcs]
    rows = [
        [a] + [grid.cost[i, j] for j in range(grid.pcs.size)]
        for i, a in enumerate(grid.alphas)
    ]
    return _write_csv(path, header, rows)


def write_frontier_csv(points, path) -> Path:
    header = ["subset", "size", "cost_per_mwh_load", "shortfall_var"]
    rows = [
        [";".join(p.subset), p.size, p.cost_per_mwh_load, p.shortfall_var]
        for p in points
    ]
    return _write_csv(path, header, rows)


def write_heatmap_csv(matrix: np.ndarray, path) -> Path:
    matrix = np.asarray(matrix)
    header = ["hour"] + [f"d{d + 1}" for d in range(matrix.shape[1])]
    rows = [[h] + list(matrix[h]) for h in range(matrix.shape[0])]
    return _write_csv(path, header, rows)


def write_weights_csv(report: SolveReport, path) -> Path:
    header = ["asset", "weight", "upper_bound"]
    rows = list(zip(report.asset_ids, report.weights, report.upper_bounds))
    return _write_csv(path, header, rows)


def write_scores_csv(scores: np.ndarray, path) -> Path:
    return _write_csv(path, ["scenario", "score"],
                      [[n + 1, v] for n, v in enumerate(np.asarray(scores))])


def write_trace_csv(trace, path) -> Path:
    """Solver iteration diagnostics (one row per accepted SQP step)."""
    header = ["iteration", "objective", "max_violation", "step_norm",
              "merit_before", "merit_after", "penalty", "hessian_min_eig"]
    rows = [
        [r.iteration, r.objective, r.max_violation, r.step_norm,
         r.merit_before, r.merit_after, r.penalty, r.hessian_min_eig]
        for r in trace
    ]
    return _write_csv(path, header, rows)


def _timestamp() -> str:
    return time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())


def emit_report(report, out_dir, fmt: str = "json", precision: str = "sig6") -> list:
    """Write a report object to timestamped files; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = _timestamp()
    written = []
    if isinstance(report, CostGrid):
        if fmt == "csv":
            written.append(write_grid_csv(report, out_dir / f"grid_{stamp}.csv"))
        else:
            written.append(write_json(report, out_dir / f"grid_{stamp}.json", precision))
    elif isinstance(report, (DiversificationResult,)):
        if fmt == "csv":
            written.append(
                write_frontier_csv(report.points, out_dir / f"frontier_{stamp}.csv")
            )
        else:
            written.append(
                write_json(report, out_dir / f"frontier_{stamp}.json", precision)
            )
    elif isinstance(report, (SolveReport, MultiLoadReport, MarginalResult)):
        name = {
            SolveReport: "solve",
            MultiLoadReport: "multiload",
            MarginalResult: "marginal",
        }[type(report)]
        if fmt == "csv" and isinstance(report, SolveReport):
            written.append(write_weights_csv(report, out_dir / f"{name}_{stamp}.csv"))
        else:
            written.append(
                write_json(report, out_dir / f"{name}_{stamp}.json", precision)
            )
    else:
        raise TypeError(f"cannot emit {type(report).__name__}")
    return written
