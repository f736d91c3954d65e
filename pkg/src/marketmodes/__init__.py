"""Spectral analysis of stock return cross-correlations.

The pipeline runs from raw closing prices to an interaction network:
log returns, the equal-time correlation matrix, its eigenvalue spectrum
compared against the Marchenko-Pastur law and shuffled surrogates, a
market/group/random mode decomposition, and threshold networks over the
group component. A two-factor simulator with sector structure generates
synthetic markets with known analytic spectra for validation.

Functional modules carry the individual steps; the estimators in
:mod:`marketmodes.estimators` wrap them in a scikit-learn style
fit-and-inspect interface.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .correlation import (
    CorrMatrix,
    Histogram,
    correlation_matrix,
    element_histogram,
    offdiag_mean,
    values_histogram,
)
from .errors import (
    DataError,
    FeasibilityError,
    InsufficientDataError,
    LeadingGapError,
    MarketModesError,
    ParseError,
    RangeError,
    ValidationError,
    ZeroVolatilityError,
)
from .estimators import CorrelationSpectrum, MarketModeFilter, ThresholdNetwork
from .factor_model import (
    AnalyticSpectrum,
    FactorParams,
    SweepPoint,
    SweepResult,
    analytic_extremes,
    analytic_spectrum_no_market,
    population_matrix,
    sample_params,
    simulate_returns,
    sweep,
)
from .filtering import (
    ModeDecomposition,
    auto_n_group,
    component_histograms,
    decompose,
)
from .network import (
    AdjacencyMatrix,
    ClusterInfo,
    ClusterScan,
    cluster_scan,
    connected_components,
    default_thresholds,
    network_report,
    select_threshold,
    threshold_adjacency,
)
from .prices import (
    PriceTable,
    SectorMap,
    forward_fill,
    inject_missing,
    parse_price_table,
    read_price_file,
    read_sector_file,
    sample_universe,
    slice_period,
)
from .returns import (
    NormalizedReturns,
    ReturnMatrix,
    log_returns,
    normalize,
    volatility,
)
from .spectrum import (
    EigenvectorEntry,
    MpLaw,
    Spectrum,
    deviating_eigenvalues,
    eigendecompose,
    eigenvector_report,
    ipr,
    mp_bounds,
    mp_density,
    shuffle_surrogate,
)

__all__ = [
    "__version__",
    # errors
    "MarketModesError", "ValidationError", "RangeError", "DataError",
    "ParseError", "InsufficientDataError", "LeadingGapError",
    "ZeroVolatilityError", "FeasibilityError",
    # prices
    "PriceTable", "SectorMap", "parse_price_table", "read_price_file",
    "read_sector_file", "forward_fill", "inject_missing", "sample_universe",
    "slice_period",
    # returns
    "ReturnMatrix", "NormalizedReturns", "log_returns", "volatility", "normalize",
    # correlation
    "CorrMatrix", "Histogram", "correlation_matrix", "offdiag_mean",
    "element_histogram", "values_histogram",
    # spectrum
    "Spectrum", "MpLaw", "EigenvectorEntry", "eigendecompose", "mp_bounds",
    "mp_density", "shuffle_surrogate", "deviating_eigenvalues", "ipr",
    "eigenvector_report",
    # filtering
    "ModeDecomposition", "decompose", "auto_n_group", "component_histograms",
    # network
    "AdjacencyMatrix", "ClusterScan", "ClusterInfo", "threshold_adjacency",
    "connected_components", "cluster_scan", "default_thresholds",
    "select_threshold", "network_report",
    # factor model
    "FactorParams", "AnalyticSpectrum", "SweepPoint", "SweepResult",
    "sample_params", "simulate_returns", "population_matrix",
    "analytic_spectrum_no_market", "analytic_extremes", "sweep",
    # estimators
    "CorrelationSpectrum", "MarketModeFilter", "ThresholdNetwork",
]
