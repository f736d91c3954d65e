"""Exception hierarchy.

Three broad families matter to callers: validation errors (bad arguments or
malformed matrices), data errors (problems with the price records themselves),
and feasibility errors (simulation configurations that cannot be satisfied).
The command line maps these onto distinct exit codes.
"""

from __future__ import annotations


class MarketModesError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MarketModesError, ValueError):
    """An argument or matrix violates a documented contract."""


class RangeError(ValidationError):
    """A numeric argument lies outside its admissible range."""


class DataError(MarketModesError, ValueError):
    """Input price or sector records cannot be used as given."""


class ParseError(DataError):
    """A record could not be parsed into (date, ticker, close)."""


class InsufficientDataError(DataError):
    """Too few observations remain to carry out the operation."""


class LeadingGapError(DataError):
    """A series starts unobserved, so it cannot be forward filled."""


class ZeroVolatilityError(DataError):
    """A return series is constant and cannot be normalized."""


class FeasibilityError(MarketModesError):
    """A simulation configuration admits no valid parameter draw."""
