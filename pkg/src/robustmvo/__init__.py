"""Robust mean-variance portfolio optimisation with interval uncertainty sets."""

from .backtest import (
    FundAllocation,
    GainReport,
    ReturnSeries,
    allocate_funds,
    capital_gain,
    portfolio_return_series,
)
from .estimation import EstimatePair, covariance_matrix, estimate, mean_vector
from .market_data import MarketDataError, PriceTable, ReturnMatrix, compute_returns, load_prices
from .model import QpProblem, build_classical_qp, build_robust_qp
from .solver import (
    ConvergenceError,
    PortfolioSolution,
    SolverConfig,
    kkt_residual,
    nearest_psd,
    project_simplex,
    solve_qp,
)
from .uncertainty import (
    BootstrapConfig,
    IntervalSet,
    RobustParams,
    block_bootstrap_intervals,
    block_shape,
    moving_window_intervals,
    percentile,
    robust_params,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "ConvergenceError",
    "EstimatePair",
    "FundAllocation",
    "GainReport",
    "IntervalSet",
    "MarketDataError",
    "PortfolioSolution",
    "PriceTable",
    "QpProblem",
    "ReturnMatrix",
    "ReturnSeries",
    "RobustParams",
    "SolverConfig",
    "allocate_funds",
    "block_bootstrap_intervals",
    "block_shape",
    "build_classical_qp",
    "build_robust_qp",
    "capital_gain",
    "compute_returns",
    "covariance_matrix",
    "estimate",
    "kkt_residual",
    "load_prices",
    "mean_vector",
    "moving_window_intervals",
    "nearest_psd",
    "percentile",
    "portfolio_return_series",
    "project_simplex",
    "robust_params",
    "solve_qp",
]
