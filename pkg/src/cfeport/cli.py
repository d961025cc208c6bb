"""Command-line entry points.

Every subcommand shares the service layer's handler functions, so a CLI run
and an HTTP request with the same inputs produce byte-identical reports.
Exit codes: 0 success, 2 validation error, 3 infeasible target, 4 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import diversification_sweep, paired_subsets
from .errors import InfeasibleError
from .metrics import CfeTarget
from .scenarios import SynthConfig, load_scenarios, save_scenarios, synthesize
from .schemas import (
    GridRequest,
    LoadTargetModel,
    MarginalModel,
    MultiloadRequest,
    OptimizeRequest,
    TargetModel,
)
from .serialize import dumps, emit_report
from .service import ServiceSettings, create_app, handle_grid, handle_multiload, handle_optimize
from .structurer import marginal_portfolio

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CONVERGENCE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfeport",
        description="Structure least-cost CFE portfolios against hourly-matching targets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize a scenario universe to CSV files")
    sim.add_argument("--config", required=True, help="SynthConfig JSON path")
    sim.add_argument("--out", required=True, help="output directory for manifest + CSVs")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")

    opt = sub.add_parser("optimize", help="single-load least-cost portfolio")
    opt.add_argument("--manifest", required=True)
    opt.add_argument("--load", type=int, default=0)
    opt.add_argument("--target", type=float, required=True, help="CFE target score p_c")
    opt.add_argument("--alpha", type=float, required=True, help="guarantee level")
    opt.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    opt.add_argument("--precision", choices=("sig6", "full"), default="sig6")

    swp = sub.add_parser("sweep", help="cost grid over (alpha, p_c)")
    swp.add_argument("--manifest", required=True)
    swp.add_argument("--load", type=int, default=0)
    swp.add_argument("--alphas", required=True, help="comma-separated guarantee levels")
    swp.add_argument("--pcs", required=True, help="comma-separated CFE targets")
    swp.add_argument("--out", required=True, help="output directory")
    swp.add_argument("--format", choices=("json", "csv"), default="csv")

    mar = sub.add_parser("marginal", help="marginal portfolio for extra load")
    mar.add_argument("--manifest", required=True)
    mar.add_argument("--load", type=int, default=0)
    mar.add_argument("--target", type=float, required=True)
    mar.add_argument("--alpha", type=float, required=True)
    mar.add_argument("--epsilon", type=float, default=0.01)
    mar.add_argument("--out", default=None)
    mar.add_argument("--precision", choices=("sig6", "full"), default="sig6")

    mul = sub.add_parser("multiload", help="multi-load allocation strategies")
    mul.add_argument("--manifest", required=True)
    mul.add_argument("--strategy", choices=("sequential", "split", "joint"), required=True)
    mul.add_argument("--loads", required=True,
                     help="JSON file: [{load, p_c, alpha, priority}, ...]")
    mul.add_argument("--out", default=None)
    mul.add_argument("--precision", choices=("sig6", "full"), default="sig6")

    fro = sub.add_parser("frontier", help="diversification sweep with shortfall VaR")
    fro.add_argument("--manifest", required=True)
    fro.add_argument("--load", type=int, default=0)
    fro.add_argument("--target", type=float, required=True)
    fro.add_argument("--alpha", type=float, required=True)
    fro.add_argument("--beta", type=float, required=True, help="VaR level")
    fro.add_argument("--subsets", required=True,
                     help="template 'paired:N1-N2' (n solar + n wind + hydro) or JSON file")
    fro.add_argument("--out", required=True, help="output directory")
    fro.add_argument("--format", choices=("json", "csv"), default="csv")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--manifest", required=True)
    srv.add_argument("--port", type=int, default=None,
                     help="default: $CFE_PORT or 8000")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--budget", type=float, default=300.0,
                     help="per-request wall-clock budget in seconds")
    srv.add_argument("--workers", type=int, default=None, help="solver admission limit")
    srv.add_argument("--static", default=None, help="directory to serve as the dashboard")

    return parser


def _emit(payload_text: str, out):
    if out is None:
        sys.stdout.write(payload_text)
    else:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(payload_text)
        print(f"wrote {out}")


def _report_exit(status: str) -> int:
    return EXIT_OK if status == "converged" else EXIT_NO_CONVERGENCE


def _cmd_simulate(args) -> int:
    config = SynthConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    manifest = save_scenarios(synthesize(config), args.out)
    print(f"wrote {manifest}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    s = load_scenarios(args.manifest)
    req = OptimizeRequest(load=args.load, target=TargetModel(p_c=args.target, alpha=args.alpha))
    model = handle_optimize(s, req)
    _emit(dumps(model, args.precision), args.out)
    return _report_exit(model.status)


def _cmd_sweep(args) -> int:
    s = load_scenarios(args.manifest)
    alphas = [float(v) for v in args.alphas.split(",") if v]
    pcs = [float(v) for v in args.pcs.split(",") if v]
    req = GridRequest(load=args.load, alphas=alphas, pcs=pcs)
    model = handle_grid(s, req)
    out_dir = Path(args.out)
    if args.format == "csv":
        from .analysis import CostGrid
        import numpy as np

        grid = CostGrid(
            alphas=np.asarray(model.alphas),
            pcs=np.asarray(model.pcs),
            cost=np.asarray(
                [[float("nan") if c is None else c for c in row] for row in model.cost]
            ),
            status=model.status,
        )
        paths = emit_report(grid, out_dir, fmt="csv")
    else:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "grid.json"
        path.write_text(dumps(model))
        paths = [path]
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_marginal(args) -> int:
    s = load_scenarios(args.manifest)
    target = CfeTarget(p_c=args.target, alpha=args.alpha)
    result = marginal_portfolio(s, args.load, target, epsilon=args.epsilon)
    model = MarginalModel.from_result(result)
    _emit(dumps(model, args.precision), args.out)
    return _report_exit(result.base.status)


def _cmd_multiload(args) -> int:
    s = load_scenarios(args.manifest)
    with open(args.loads) as fh:
        entries = json.load(fh)
    loads = [
        LoadTargetModel(
            load=int(e["load"]),
            target=TargetModel(p_c=float(e["p_c"]), alpha=float(e["alpha"])),
            priority=int(e.get("priority", idx)),
        )
        for idx, e in enumerate(entries)
    ]
    req = MultiloadRequest(strategy=args.strategy, loads=loads)
    model = handle_multiload(s, req)
    _emit(dumps(model, args.precision), args.out)
    worst = EXIT_OK
    for rep in model.reports:
        worst = max(worst, _report_exit(rep.status))
    return worst


def _parse_subsets(template: str, s) -> list:
    if template.startswith("paired:"):
        lohi = template.split(":", 1)[1]
        parts = lohi.split("-")
        n1 = int(parts[0])
        n2 = int(parts[1]) if len(parts) > 1 else n1
        return paired_subsets(s, range(n1, n2 + 1))
    with open(template) as fh:
        return json.load(fh)


def _cmd_frontier(args) -> int:
    s = load_scenarios(args.manifest)
    subsets = _parse_subsets(args.subsets, s)
    target = CfeTarget(p_c=args.target, alpha=args.alpha)
    result = diversification_sweep(s, args.load, target, subsets, args.beta)
    paths = emit_report(result, args.out, fmt=args.format)
    for p in paths:
        print(f"wrote {p}")
    if result.infeasible:
        print(f"{len(result.infeasible)} subsets infeasible and skipped", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    s = load_scenarios(args.manifest)
    settings = ServiceSettings(time_budget_seconds=args.budget, max_workers=args.workers)
    app = create_app(s, settings, static_dir=args.static)
    port = args.port if args.port is not None else int(os.environ.get("CFE_PORT", "8000"))
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "marginal": _cmd_marginal,
    "multiload": _cmd_multiload,
    "frontier": _cmd_frontier,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleError as exc:
        detail = f" (max attainable quantile {exc.max_attainable:.6f})" \
            if exc.max_attainable is not None else ""
        print(f"infeasible: {exc}{detail}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
