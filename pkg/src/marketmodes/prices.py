"""Price table ingestion and cleanup.

A :class:`PriceTable` holds daily closing prices on a dates-by-tickers grid
together with an observation mask. Records arrive as (date, ticker, close)
triples, typically from a delimited file; the grid is the union of all dates
and tickers, with unobserved cells marked in the mask. Gaps are closed by
carrying the last observed price forward, which keeps the corresponding log
return at zero. ``inject_missing`` plants synthetic gaps that mimic the same
convention, so recovery benchmarks have a known ground truth.

All operations are pure: they return new tables and never modify arguments.
Seeded operations use numpy's PCG64 generator and are reproducible per seed.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from math import isfinite

import numpy as np

from .errors import (
    InsufficientDataError,
    LeadingGapError,
    ParseError,
    RangeError,
    ValidationError,
)

PRICE_HEADER = ("date", "ticker", "close")
SECTOR_HEADER = ("ticker", "sector")


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PriceTable:
    """Closing prices for ``n_stocks`` tickers over ``n_dates`` trading dates.

    Attributes
    ----------
    tickers : tuple of str
        Unique asset identifiers, in first-appearance order.
    dates : tuple of str
        Strictly increasing date labels. ISO-8601 strings sort correctly;
        any label scheme whose lexicographic order is chronological works.
    prices : ndarray of shape (n_stocks, n_dates)
        Close prices. Cells may be NaN only where ``observed`` is False.
    observed : ndarray of bool, shape (n_stocks, n_dates)
        True where a price was actually recorded. Filled or injected cells
        carry values but stay False, so the original coverage is auditable.
    """

    tickers: tuple[str, ...]
    dates: tuple[str, ...]
    prices: np.ndarray
    observed: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        prices = np.array(self.prices, dtype=np.float64)
        observed = np.array(self.observed, dtype=bool)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "observed", observed)

        if len(set(self.tickers)) != len(self.tickers):
            raise ValidationError("tickers must be unique")
        if any(not t for t in self.tickers):
            raise ValidationError("tickers must be non-empty strings")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValidationError(f"dates must be strictly increasing: {a!r} !< {b!r}")
        shape = (len(self.tickers), len(self.dates))
        if prices.shape != shape or observed.shape != shape:
            raise ValidationError(
                f"prices/observed must have shape {shape}, got {prices.shape} and {observed.shape}"
            )
        # observed cells must hold usable prices; filled cells likewise
        values = prices[~np.isnan(prices)]
        if values.size and (not np.all(np.isfinite(values)) or np.any(values <= 0.0)):
            raise ValidationError("all recorded prices must be positive and finite")
        if np.any(np.isnan(prices) & observed):
            raise ValidationError("observed cells cannot be NaN")

    @property
    def n_stocks(self) -> int:
        return len(self.tickers)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def is_filled(self) -> bool:
        """True when every cell carries a value (observed or filled in)."""
        return not np.isnan(self.prices).any()


@dataclass(frozen=True, eq=False)
class SectorMap:
    """Mapping from ticker to sector label."""

    mapping: dict[str, str]

    def sector_of(self, ticker: str) -> str:
        try:
            return self.mapping[ticker]
        except KeyError:
            raise ValidationError(f"no sector recorded for ticker {ticker!r}") from None

    def require_cover(self, tickers: Iterable[str]) -> None:
        """Raise unless every ticker has a sector."""
        missing = [t for t in tickers if t not in self.mapping]
        if missing:
            shown = ", ".join(missing[:5])
            raise ValidationError(
                f"sector map missing {len(missing)} ticker(s): {shown}"
            )

    @classmethod
    def uniform(cls, tickers: Iterable[str], label: str = "UNK") -> SectorMap:
        """Constant map used when no sector file is supplied."""
        return cls({t: label for t in tickers})


# ---------------------------------------------------------------------------
# parsing and file readers
# ---------------------------------------------------------------------------


def parse_price_table(records: Iterable[Sequence]) -> PriceTable:
    """Assemble (date, ticker, close) records into a :class:`PriceTable`.

    The grid covers the union of dates (ascending) and tickers
    (first-appearance order). Cells with no record are marked unobserved.

    Raises
    ------
    ParseError
        For a malformed or duplicate record; the message carries the
        1-based record index.
    ValidationError
        For a price that is not strictly positive and finite; the message
        names the ticker and date.
    InsufficientDataError
        If fewer than two distinct dates are present.
    """
    parsed: list[tuple[str, str, float]] = []
    seen: set[tuple[str, str]] = set()
    for idx, record in enumerate(records, start=1):
        try:
            date_raw, ticker_raw, close_raw = record
        except (TypeError, ValueError):
            raise ParseError(
                f"row {idx}: expected (date, ticker, close), got {record!r}"
            ) from None
        date = str(date_raw).strip()
        ticker = str(ticker_raw).strip()
        if not date or not ticker:
            raise ParseError(f"row {idx}: empty date or ticker field")
        try:
            close = float(close_raw)
        except (TypeError, ValueError):
            raise ParseError(f"row {idx}: cannot parse close value {close_raw!r}") from None
        if not isfinite(close) or close <= 0.0:
            raise ValidationError(
                f"non-positive price for {ticker} on {date}: {close_raw!r}"
            )
        key = (date, ticker)
        if key in seen:
            raise ParseError(f"row {idx}: duplicate record for {ticker} on {date}")
        seen.add(key)
        parsed.append((date, ticker, close))

    dates = sorted({date for date, _, _ in parsed})
    if len(dates) < 2:
        raise InsufficientDataError(
            f"need at least 2 distinct dates, got {len(dates)}"
        )
    tickers: list[str] = []
    ticker_index: dict[str, int] = {}
    for _, ticker, _ in parsed:
        if ticker not in ticker_index:
            ticker_index[ticker] = len(tickers)
            tickers.append(ticker)
    date_index = {d: j for j, d in enumerate(dates)}

    prices = np.full((len(tickers), len(dates)), np.nan)
    observed = np.zeros((len(tickers), len(dates)), dtype=bool)
    for date, ticker, close in parsed:
        i, j = ticker_index[ticker], date_index[date]
        prices[i, j] = close
        observed[i, j] = True
    return PriceTable(tuple(tickers), tuple(dates), prices, observed)


def _read_delimited(path, delimiter: str, header: tuple[str, ...]) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(field.strip() for field in first) != header:
            raise ParseError(
                f"{path}: expected header {','.join(header)!r}, got {','.join(first)!r}"
            )
        return [row for row in reader if row]


def read_price_file(path, delimiter: str = ",") -> PriceTable:
    """Read ``date,ticker,close`` records from a delimited text file."""
    return parse_price_table(_read_delimited(path, delimiter, PRICE_HEADER))


def read_sector_file(path, delimiter: str = ",") -> SectorMap:
    """Read a ``ticker,sector`` map from a delimited text file."""
    rows = _read_delimited(path, delimiter, SECTOR_HEADER)
    mapping: dict[str, str] = {}
    for idx, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise ParseError(f"row {idx}: expected (ticker, sector), got {row!r}")
        ticker, sector = (field.strip() for field in row)
        if not ticker or not sector:
            raise ParseError(f"row {idx}: empty ticker or sector field")
        if ticker in mapping:
            raise ParseError(f"row {idx}: duplicate sector record for {ticker}")
        mapping[ticker] = sector
    return SectorMap(mapping)


# ---------------------------------------------------------------------------
# cleanup and resampling operations
# ---------------------------------------------------------------------------


def forward_fill(table: PriceTable) -> PriceTable:
    """Fill unobserved cells with the last observed price to their left.

    A filled cell repeats the preceding price, so its one-day log return is
    zero. The observation mask is preserved, which makes the operation
    idempotent and keeps the original coverage available for audit.

    Raises
    ------
    LeadingGapError
        If any series starts unobserved; there is nothing to carry forward.
    """
    n, t = table.prices.shape
    leading = ~table.observed[:, 0]
    if leading.any():
        bad = table.tickers[int(np.argmax(leading))]
        raise LeadingGapError(f"series for {bad} starts unobserved on {table.dates[0]}")
    last_seen = np.where(table.observed, np.arange(t)[None, :], 0)
    np.maximum.accumulate(last_seen, axis=1, out=last_seen)
    filled = table.prices[np.arange(n)[:, None], last_seen]
    return PriceTable(table.tickers, table.dates, filled, table.observed.copy())


def inject_missing(table: PriceTable, count: int, seed: int) -> PriceTable:
    """Plant ``count`` synthetic gaps, each frozen at the preceding value.

    Cells are drawn uniformly without replacement from all positions except
    the first column. Targets are processed in date order, so a run of
    injected cells copies one value through, exactly as forward filling
    would reconstruct it. Injected cells are marked unobserved.

    Raises
    ------
    RangeError
        If ``count`` is negative or exceeds ``n_stocks * (n_dates - 1)``.
    ValidationError
        If the table already has unobserved cells; gaps are injected into
        complete tables so the recovery benchmark has a clean ground truth.
    """
    n, t = table.prices.shape
    count = int(count)
    eligible = n * (t - 1)
    if not 0 <= count <= eligible:
        raise RangeError(f"count must be in [0, {eligible}], got {count}")
    if not table.observed.all():
        raise ValidationError("inject_missing requires a fully observed table")
    rng = np.random.default_rng(seed)
    flat = rng.choice(eligible, size=count, replace=False)
    rows, cols = np.divmod(flat, t - 1)
    cols = cols + 1  # first column is never eligible

    prices = table.prices.copy()
    observed = table.observed.copy()
    order = np.argsort(cols, kind="stable")
    for i, j in zip(rows[order], cols[order]):
        prices[i, j] = prices[i, j - 1]
        observed[i, j] = False
    return PriceTable(table.tickers, table.dates, prices, observed)


def sample_universe(table: PriceTable, n: int, seed: int) -> PriceTable:
    """Keep a uniform random subset of ``n`` tickers, order preserved."""
    n = int(n)
    if not 1 <= n <= table.n_stocks:
        raise RangeError(f"n must be in [1, {table.n_stocks}], got {n}")
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(table.n_stocks, size=n, replace=False))
    tickers = tuple(table.tickers[i] for i in keep)
    return PriceTable(tickers, table.dates, table.prices[keep], table.observed[keep])


def slice_period(table: PriceTable, start: str, end: str) -> PriceTable:
    """Restrict the table to dates in the closed range [start, end].

    Raises
    ------
    InsufficientDataError
        If fewer than two dates fall inside the window.
    """
    keep = [j for j, d in enumerate(table.dates) if start <= d <= end]
    if len(keep) < 2:
        raise InsufficientDataError(
            f"period {start}..{end} covers {len(keep)} date(s); need at least 2"
        )
    dates = tuple(table.dates[j] for j in keep)
    idx = np.asarray(keep)
    return PriceTable(table.tickers, dates, table.prices[:, idx], table.observed[:, idx])
