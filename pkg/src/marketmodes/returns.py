"""Log returns and their normalization.

The return of stock ``i`` over ``dt`` days is ``ln P_i(t + dt) - ln P_i(t)``.
Normalization subtracts the time average and divides by the volatility

    sigma_i = sqrt(<R_i^2> - <R_i>^2),

with plain time averages over the T available returns (population
convention, divisor T). Normalized rows therefore have mean 0 and standard
deviation 1 under the same convention, which fixes the scale of the
correlation matrix built from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    RangeError,
    ValidationError,
    ZeroVolatilityError,
)
from .prices import PriceTable


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    """Log returns, one row per ticker, one column per return interval."""

    tickers: tuple[str, ...]
    values: np.ndarray
    dt: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        values = np.array(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != len(self.tickers):
            raise ValidationError(
                f"values must be (n_stocks, n_returns), got {values.shape} "
                f"for {len(self.tickers)} tickers"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("return values must be finite")
        if int(self.dt) < 1:
            raise RangeError(f"dt must be >= 1, got {self.dt}")

    @property
    def n_stocks(self) -> int:
        return len(self.tickers)

    @property
    def n_returns(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class NormalizedReturns:
    """Returns shifted to mean 0 and scaled to unit volatility per row."""

    tickers: tuple[str, ...]
    values: np.ndarray
    means: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "values", np.array(self.values, dtype=np.float64))
        object.__setattr__(self, "means", np.array(self.means, dtype=np.float64))
        object.__setattr__(self, "sigmas", np.array(self.sigmas, dtype=np.float64))
        n = len(self.tickers)
        if self.values.ndim != 2 or self.values.shape[0] != n:
            raise ValidationError("values must be (n_stocks, n_returns)")
        if self.means.shape != (n,) or self.sigmas.shape != (n,):
            raise ValidationError("means and sigmas must have one entry per ticker")
        if np.any(self.sigmas <= 0.0):
            raise ValidationError("sigmas must be strictly positive")

    @property
    def n_stocks(self) -> int:
        return len(self.tickers)

    @property
    def n_returns(self) -> int:
        return self.values.shape[1]


def log_returns(table: PriceTable, dt: int = 1) -> ReturnMatrix:
    """Log returns over a ``dt``-day horizon from a fully filled price table.

    A table with T dates yields T - dt returns per stock. Returns over
    ``dt`` days telescope: consecutive one-day returns sum to the
    corresponding ``dt``-day return.

    Raises
    ------
    RangeError
        If ``dt`` is outside ``1..n_dates - 1``.
    ValidationError
        If the table still contains unfilled cells.
    """
    dt = int(dt)
    if not 1 <= dt <= table.n_dates - 1:
        raise RangeError(f"dt must be in [1, {table.n_dates - 1}], got {dt}")
    if not table.is_filled:
        raise ValidationError(
            "price table has unfilled cells; apply forward_fill before taking returns"
        )
    log_prices = np.log(table.prices)
    values = log_prices[:, dt:] - log_prices[:, :-dt]
    return ReturnMatrix(table.tickers, values, dt)


def volatility(series, label: str | None = None) -> float:
    """Population standard deviation of one return series.

    Two-pass formula: the mean is removed first, then squared deviations
    are averaged with divisor T.

    Raises
    ------
    InsufficientDataError
        If the series has fewer than two values.
    ZeroVolatilityError
        If the series is constant; ``label`` (usually the ticker) is named
        in the message when given.
    """
    values = np.asarray(series, dtype=np.float64).ravel()
    if values.size < 2:
        raise InsufficientDataError(f"volatility needs at least 2 values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("volatility input must be finite")
    centered = values - values.mean()
    variance = float(np.mean(centered * centered))
    if variance <= 0.0:
        name = label if label is not None else "series"
        raise ZeroVolatilityError(f"{name} has zero variance; cannot normalize")
    return float(np.sqrt(variance))


def normalize(returns: ReturnMatrix) -> NormalizedReturns:
    """Shift each row to mean 0 and scale it to unit volatility.

    Idempotent up to rounding: normalizing the output again reproduces it.

    Raises
    ------
    ZeroVolatilityError
        If any row is constant; the message names the ticker.
    """
    values = returns.values
    means = values.mean(axis=1)
    sigmas = np.empty(returns.n_stocks)
    for i, ticker in enumerate(returns.tickers):
        sigmas[i] = volatility(values[i], label=ticker)
    normalized = (values - means[:, None]) / sigmas[:, None]
    return NormalizedReturns(returns.tickers, normalized, means, sigmas)
