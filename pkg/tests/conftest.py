"""Shared fixtures: a synthetic three-sector market and price files on disk.

The three-sector market is the workhorse: strong sector strengths make the
group modes stand out, so sector recovery through the spectrum, the mode
decomposition and the threshold network can be asserted exactly. The price
files exercise the ingestion path and the command line end to end.
"""

from __future__ import annotations

import datetime

import numpy as np
import pytest

from marketmodes.correlation import correlation_matrix
from marketmodes.factor_model import (
    sample_params,
    sector_label,
    simulate_returns,
    stock_tickers,
)
from marketmodes.prices import SectorMap
from marketmodes.returns import normalize
from marketmodes.spectrum import eigendecompose, mp_bounds

THREE_SECTOR_SIZES = (20, 20, 20)
THREE_SECTOR_GAMMA = 0.6
THREE_SECTOR_SIGMA = 0.2
THREE_SECTOR_T = 2000


def weekday_dates(n: int, start: datetime.date = datetime.date(2001, 1, 1)) -> list[str]:
    """n consecutive weekday labels in ISO form, Monday start."""
    out: list[str] = []
    day = start
    while len(out) < n:
        if day.weekday() < 5:
            out.append(day.isoformat())
        day += datetime.timedelta(days=1)
    return out


def sector_map_for(params) -> SectorMap:
    tickers = stock_tickers(params.n_stocks)
    index = params.sector_index
    return SectorMap({t: sector_label(index[i]) for i, t in enumerate(tickers)})


@pytest.fixture(scope="session")
def three_sector_params():
    return sample_params(THREE_SECTOR_SIZES, THREE_SECTOR_GAMMA, THREE_SECTOR_SIGMA,
                         width=0.0, seed=11)


@pytest.fixture(scope="session")
def three_sector_returns(three_sector_params):
    return simulate_returns(three_sector_params, THREE_SECTOR_T, seed=7)


@pytest.fixture(scope="session")
def three_sector_sectors(three_sector_params):
    return sector_map_for(three_sector_params)


@pytest.fixture(scope="session")
def three_sector_pipeline(three_sector_returns):
    """(normalized, correlation, spectrum, mp law) of the synthetic market."""
    normalized = normalize(three_sector_returns)
    corr = correlation_matrix(normalized)
    spectrum = eigendecompose(corr)
    law = mp_bounds(spectrum.q)
    return normalized, corr, spectrum, law


@pytest.fixture(scope="session")
def ten_sector_market():
    """Market-plus-ten-sectors simulation: (params, spectrum, mp law)."""
    params = sample_params((20,) * 10, 0.4, 0.4, width=0.0, seed=17)
    returns = simulate_returns(params, 2000, seed=23)
    spectrum = eigendecompose(correlation_matrix(normalize(returns)))
    return params, spectrum, mp_bounds(spectrum.q)


def write_price_panel(prices_path, sectors_path, returns, sectors,
                      scale: float = 0.02) -> None:
    """Materialize simulated returns as a long-format price file."""
    n, t = returns.values.shape
    log_prices = np.concatenate(
        [np.zeros((n, 1)), np.cumsum(scale * returns.values, axis=1)], axis=1
    )
    prices = 100.0 * np.exp(log_prices)
    dates = weekday_dates(t + 1)
    with open(prices_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("date,ticker,close\n")
        for j, date in enumerate(dates):
            for i, ticker in enumerate(returns.tickers):
                handle.write(f"{date},{ticker},{float(prices[i, j])!r}\n")
    with open(sectors_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("ticker,sector\n")
        for ticker in returns.tickers:
            handle.write(f"{ticker},{sectors.sector_of(ticker)}\n")


@pytest.fixture(scope="session")
def price_files(tmp_path_factory):
    """Small 3-sector price panel on disk: 12 stocks, 261 dates."""
    root = tmp_path_factory.mktemp("panel")
    params = sample_params((4, 4, 4), 0.7, 0.2, width=0.0, seed=3)
    returns = simulate_returns(params, 260, seed=21)
    sectors = sector_map_for(params)
    prices_path = root / "prices.csv"
    sectors_path = root / "sectors.csv"
    write_price_panel(prices_path, sectors_path, returns, sectors)
    return {"prices": prices_path, "sectors": sectors_path, "n_stocks": 12,
            "n_dates": 261, "tickers": returns.tickers}
