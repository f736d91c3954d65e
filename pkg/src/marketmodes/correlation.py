"""Equal-time correlation matrices and element histograms.

With normalized returns ``r_i`` the correlation matrix is ``C_ij =
<r_i r_j>``, averaged over time. By construction it is symmetric with unit
diagonal, entries in [-1, 1], and it is a Gram matrix, hence positive
semidefinite up to rounding. The distribution of its off-diagonal elements
is the first summary statistic of cross-correlations: its mean measures how
strongly the market moves together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._utils import SYMMETRY_ATOL, check_square_symmetric, upper_triangle
from .errors import RangeError, ValidationError
from .returns import NormalizedReturns

DEFAULT_BINS = 50
DEFAULT_RANGE = (-1.0, 1.0)


@dataclass(frozen=True, eq=False)
class CorrMatrix:
    """Correlation matrix with the tickers labelling its rows and columns.

    ``n_obs`` records how many return observations produced the matrix; it
    is needed downstream for the random-matrix comparison and is None for
    matrices of unknown provenance.
    """

    tickers: tuple[str, ...]
    entries: np.ndarray
    n_obs: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        entries = check_square_symmetric(self.entries, SYMMETRY_ATOL, "correlation matrix")
        object.__setattr__(self, "entries", entries)
        n = entries.shape[0]
        if n != len(self.tickers):
            raise ValidationError(
                f"matrix is {n}x{n} but {len(self.tickers)} tickers were given"
            )
        if np.max(np.abs(np.diag(entries) - 1.0)) > 1e-9:
            raise ValidationError("correlation matrix must have unit diagonal")
        if np.max(np.abs(entries)) > 1.0 + 1e-9:
            raise ValidationError("correlation entries must lie in [-1, 1]")
        if self.n_obs is not None and int(self.n_obs) < 2:
            raise ValidationError(f"n_obs must be >= 2, got {self.n_obs}")

    @property
    def n_assets(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class Histogram:
    """Fixed-grid histogram with raw counts and a normalized density.

    ``overflow`` counts samples that fell outside the grid and were clamped
    into the edge bins, so ``counts`` always sums to the sample count and
    the density integrates to 1.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    overflow: int = 0

    def __post_init__(self) -> None:
        edges = np.array(self.bin_edges, dtype=np.float64)
        counts = np.array(self.counts, dtype=np.int64)
        density = np.array(self.density, dtype=np.float64)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "density", density)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("bin_edges must be a 1-D array of at least 2 edges")
        if counts.shape != (edges.size - 1,) or density.shape != counts.shape:
            raise ValidationError("counts and density must have one entry per bin")

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())


def values_histogram(
    values,
    bins: int = DEFAULT_BINS,
    value_range: tuple[float, float] = DEFAULT_RANGE,
) -> Histogram:
    """Histogram an array of values on a fixed grid, clamping outliers.

    Values outside ``value_range`` are moved into the nearest edge bin and
    counted in ``overflow``; nothing is silently dropped.
    """
    bins = int(bins)
    lo, hi = (float(value_range[0]), float(value_range[1]))
    if bins < 1:
        raise RangeError(f"bins must be >= 1, got {bins}")
    if not lo < hi:
        raise RangeError(f"value_range must satisfy lo < hi, got ({lo}, {hi})")
    flat = np.asarray(values, dtype=np.float64).ravel()
    if flat.size == 0:
        raise ValidationError("cannot histogram an empty sample")
    overflow = int(np.count_nonzero((flat < lo) | (flat > hi)))
    counts, edges = np.histogram(np.clip(flat, lo, hi), bins=bins, range=(lo, hi))
    widths = np.diff(edges)
    density = counts / (flat.size * widths)
    return Histogram(edges, counts, density, overflow)


def correlation_matrix(normalized: NormalizedReturns) -> CorrMatrix:
    """Equal-time correlation matrix ``C_ij = <r_i r_j>`` of normalized returns.

    The product is symmetrized explicitly and the diagonal forced to exactly
    1.0 to remove rounding asymmetry from the matrix product.
    """
    if normalized.n_stocks < 1:
        raise ValidationError("need at least 1 stock to correlate")
    t_len = normalized.n_returns
    if t_len < 2:
        raise ValidationError("need at least 2 return observations")
    raw = normalized.values @ normalized.values.T / t_len
    entries = (raw + raw.T) / 2.0
    np.fill_diagonal(entries, 1.0)
    np.clip(entries, -1.0, 1.0, out=entries)
    return CorrMatrix(normalized.tickers, entries, n_obs=t_len)


def offdiag_mean(corr: CorrMatrix) -> float:
    """Mean of the entries above the diagonal (each pair counted once)."""
    return float(upper_triangle(corr.entries).mean())


def element_histogram(
    corr: CorrMatrix,
    bins: int = DEFAULT_BINS,
    value_range: tuple[float, float] = DEFAULT_RANGE,
) -> Histogram:
    """Distribution of the off-diagonal correlation coefficients.

    Only entries above the diagonal enter, so each pair is counted once and
    the unit diagonal is excluded.
    """
    return values_histogram(upper_triangle(corr.entries), bins, value_range)
