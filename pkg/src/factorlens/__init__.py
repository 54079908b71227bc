"""Portfolio factor analytics and strategy-map embedding."""

from .analytics import (
    CorrelationSurface,
    CumulativeReturnSeries,
    build_correlation_surface,
    cumulative_return,
    period_correlation_matrix,
    portfolio_return_series,
    rolling_correlation,
)
from .catalog import DEFAULT_CATALOG, N_FACTORS, N_SECTORS, RECORD_DIM, FactorCatalog
from .factors import (
    CrossSection,
    FactorReturnMatrix,
    aggregate_portfolio_exposures,
    aggregate_sector_positions,
    attach_derived_fields,
    decompose_return,
    estimate_factor_returns,
    estimate_panel_factor_returns,
    standardize_exposures,
)
from .market_io import load_panel, load_portfolios, write_panel, write_portfolios
from .panel import StockPanel
from .portfolios import MarketIndex, PortfolioSeries, build_benchmarks
from .synthetic import PlantedTruth, SyntheticConfig, generate_synthetic_market

__version__ = "0.1.0"

__all__ = [
    "CorrelationSurface",
    "CrossSection",
    "CumulativeReturnSeries",
    "DEFAULT_CATALOG",
    "FactorCatalog",
    "FactorReturnMatrix",
    "MarketIndex",
    "N_FACTORS",
    "N_SECTORS",
    "PlantedTruth",
    "PortfolioSeries",
    "RECORD_DIM",
    "StockPanel",
    "SyntheticConfig",
    "aggregate_portfolio_exposures",
    "aggregate_sector_positions",
    "attach_derived_fields",
    "build_benchmarks",
    "build_correlation_surface",
    "cumulative_return",
    "decompose_return",
    "estimate_factor_returns",
    "estimate_panel_factor_returns",
    "generate_synthetic_market",
    "load_panel",
    "load_portfolios",
    "period_correlation_matrix",
    "portfolio_return_series",
    "rolling_correlation",
    "standardize_exposures",
    "write_panel",
    "write_portfolios",
]
