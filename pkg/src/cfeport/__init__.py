"""Scenario-based structuring of least-cost 24/7 carbon-free energy portfolios."""

from .errors import InfeasibleError, LineSearchError
from .metrics import (
    CfeTarget,
    PortfolioWeights,
    ScoreDistribution,
    annual_scores,
    cost_per_mw_load,
    empirical_quantile,
    gaussian_quantile,
    hourly_heatmap,
    hourly_ratio,
    over_procurement,
    portfolio_cost,
    shortfall,
    shortfall_var,
)
from .scenarios import (
    AssetSpec,
    ScenarioSet,
    SynthAsset,
    SynthConfig,
    SynthLoad,
    average_generation,
    load_scenarios,
    save_scenarios,
    synthesize,
)
from .sqp import NlpProblem, SqpResult, SqpSettings, fd_gradient, slsqp_solve
from .structurer import (
    LoadSpec,
    MultiLoadReport,
    SolveReport,
    marginal_portfolio,
    solve_approx,
    solve_joint,
    solve_sequential,
    solve_single,
    solve_split,
)

__version__ = "0.1.0"

__all__ = [
    "AssetSpec",
    "CfeTarget",
    "InfeasibleError",
    "LineSearchError",
    "LoadSpec",
    "MultiLoadReport",
    "NlpProblem",
    "PortfolioWeights",
    "ScenarioSet",
    "ScoreDistribution",
    "SolveReport",
    "SqpResult",
    "SqpSettings",
    "SynthAsset",
    "SynthConfig",
    "SynthLoad",
    "annual_scores",
    "average_generation",
    "cost_per_mw_load",
    "empirical_quantile",
    "fd_gradient",
    "gaussian_quantile",
    "hourly_heatmap",
    "hourly_ratio",
    "load_scenarios",
    "marginal_portfolio",
    "over_procurement",
    "portfolio_cost",
    "save_scenarios",
    "shortfall",
    "shortfall_var",
    "slsqp_solve",
    "solve_approx",
    "solve_joint",
    "solve_sequential",
    "solve_single",
    "solve_split",
    "synthesize",
]
