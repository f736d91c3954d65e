"""Two-factor market simulator with sector structure.

Stock ``i`` in sector ``k`` follows

    r_i = beta_i r_m + gamma_i r_g(k) + sigma_i eta_i,

where the market factor ``r_m``, the K sector factors ``r_g(k)`` and the
idiosyncratic noises ``eta_i`` are independent unit Gaussians. The strengths
satisfy ``beta^2 + gamma^2 + sigma^2 = 1``, so every stock has unit variance
and the population correlation matrix is

    C_ij = beta_i beta_j + gamma_i gamma_j [same sector],  C_ii = 1.

Without a market term the population spectrum is known in closed form: each
sector of size n and strength gamma contributes one large eigenvalue
``1 + (n - 1) gamma^2`` and a small one ``1 - gamma^2`` with multiplicity
``n - 1``. With a dominant market term the extremes scale as

    lambda_0 ~ N beta^2,    lambda_1 ~ n_largest (1 - beta^2),

and the small eigenvalues cluster near ``1 - beta^2 - gamma^2``. These
analytic values are the ground truth that simulated spectra are checked
against.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass

import numpy as np

from ._utils import spawn_seeds
from .errors import FeasibilityError, RangeError, ValidationError
from .returns import ReturnMatrix

# A stock whose (gamma, sigma) box rejects this many consecutive draws is
# treated as an infeasible configuration (empirical rejection rate > 99%).
MAX_REJECTIONS = 1000

UNIT_VARIANCE_ATOL = 1e-12


def sector_label(k: int) -> str:
    """Compact sector name: letters A..Z, then G27, G28, ..."""
    if 0 <= k < len(string.ascii_uppercase):
        return string.ascii_uppercase[k]
    return f"G{k + 1}"


def stock_tickers(n: int) -> list[str]:
    """Synthetic tickers S000, S001, ... for simulated universes."""
    width = max(3, len(str(max(n - 1, 0))))
    return [f"S{i:0{width}d}" for i in range(n)]


@dataclass(frozen=True, eq=False)
class FactorParams:
    """Per-stock factor strengths for a sectorized universe.

    ``sizes[k]`` stocks belong to sector k, in contiguous blocks; the three
    strength arrays have one entry per stock and satisfy the unit-variance
    constraint row by row.
    """

    sizes: tuple[int, ...]
    beta: np.ndarray
    gamma: np.ndarray
    sigma_idio: np.ndarray

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        beta = np.array(self.beta, dtype=np.float64)
        gamma = np.array(self.gamma, dtype=np.float64)
        sigma = np.array(self.sigma_idio, dtype=np.float64)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma_idio", sigma)

        if not sizes or any(s < 1 for s in sizes):
            raise ValidationError(f"sector sizes must be positive, got {sizes}")
        n = sum(sizes)
        for name, arr in (("beta", beta), ("gamma", gamma), ("sigma_idio", sigma)):
            if arr.shape != (n,):
                raise ValidationError(f"{name} must have {n} entries, got {arr.shape}")
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValidationError(f"{name} entries must lie in [0, 1]")
        budget = beta**2 + gamma**2 + sigma**2
        worst = float(np.max(np.abs(budget - 1.0)))
        if worst > UNIT_VARIANCE_ATOL:
            raise ValidationError(
                f"beta^2 + gamma^2 + sigma^2 must equal 1, worst deviation {worst:.3e}"
            )

    @property
    def n_stocks(self) -> int:
        return sum(self.sizes)

    @property
    def n_sectors(self) -> int:
        return len(self.sizes)

    @property
    def sector_index(self) -> np.ndarray:
        """Sector number of each stock, shape (n_stocks,)."""
        return np.repeat(np.arange(self.n_sectors), self.sizes)


@dataclass(frozen=True, eq=False)
class AnalyticSpectrum:
    """Closed-form eigenvalues with multiplicities, largest first.

    ``large`` holds one (value, multiplicity) pair per sector; ``small``
    holds the bulk values. Multiplicities total the number of stocks and
    the weighted sum of eigenvalues equals it too (unit trace per stock).
    """

    large: tuple[tuple[float, int], ...]
    small: tuple[tuple[float, int], ...]

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.large) + sum(m for _, m in self.small)

    @property
    def trace(self) -> float:
        return sum(v * m for v, m in self.large) + sum(v * m for v, m in self.small)

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues expanded by multiplicity, descending."""
        expanded: list[float] = []
        for value, mult in list(self.large) + list(self.small):
            expanded.extend([value] * mult)
        return np.sort(np.asarray(expanded))[::-1]


@dataclass(frozen=True)
class SweepPoint:
    """Measured spectrum extremes at one (gamma, sigma) grid point."""

    gamma: float
    sigma: float
    beta_sq_mean: float
    lambda0: float
    lambda1: float


@dataclass(frozen=True)
class SweepResult:
    """Feasible grid points with measurements, plus the skipped points."""

    points: tuple[SweepPoint, ...]
    skipped: tuple[tuple[float, float], ...]


# ---------------------------------------------------------------------------
# parameter sampling and simulation
# ---------------------------------------------------------------------------


def _check_strength(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise RangeError(f"{name} must lie in [0, 1], got {value}")
    return value


def sample_params(
    sizes,
    gamma_mean: float,
    sigma_mean: float,
    width: float,
    seed: int,
) -> FactorParams:
    """Draw per-stock strengths around the given means.

    ``gamma_i`` and ``sigma_i`` are uniform on ``mean +- width/2``, clamped
    to [0, 1]; draws with ``gamma^2 + sigma^2 > 1`` are rejected and
    redrawn, and ``beta_i`` absorbs the rest of the variance budget.

    Raises
    ------
    FeasibilityError
        If no point of the draw box satisfies the constraint, or a stock
        exhausts the rejection budget.
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise RangeError(f"sector sizes must be positive, got {sizes}")
    gamma_mean = _check_strength("gamma_mean", gamma_mean)
    sigma_mean = _check_strength("sigma_mean", sigma_mean)
    width = float(width)
    if width < 0.0:
        raise RangeError(f"width must be >= 0, got {width}")

    half = width / 2.0
    gamma_lo = min(max(gamma_mean - half, 0.0), 1.0)
    sigma_lo = min(max(sigma_mean - half, 0.0), 1.0)
    if gamma_lo**2 + sigma_lo**2 > 1.0:
        raise FeasibilityError(
            f"no draw around gamma={gamma_mean}, sigma={sigma_mean} (width {width}) "
            f"can satisfy gamma^2 + sigma^2 <= 1"
        )

    rng = np.random.default_rng(seed)
    n = sum(sizes)
    gamma = np.empty(n)
    sigma = np.empty(n)
    for i in range(n):
        for attempt in range(MAX_REJECTIONS + 1):
            g = float(np.clip(rng.uniform(gamma_mean - half, gamma_mean + half), 0.0, 1.0))
            s = float(np.clip(rng.uniform(sigma_mean - half, sigma_mean + half), 0.0, 1.0))
            if g * g + s * s <= 1.0:
                gamma[i], sigma[i] = g, s
                break
        else:
            raise FeasibilityError(
                f"rejection rate above {MAX_REJECTIONS} consecutive draws for "
                f"gamma={gamma_mean}, sigma={sigma_mean}, width={width}"
            )
    beta = np.sqrt(np.maximum(0.0, 1.0 - gamma**2 - sigma**2))
    return FactorParams(sizes, beta, gamma, sigma)


def simulate_returns(params: FactorParams, t_len: int, seed: int) -> ReturnMatrix:
    """Simulate ``t_len`` return observations from the two-factor model.

    The market factor, each sector factor and each idiosyncratic noise get
    their own child stream of one seed, so any sub-series is reproducible
    in isolation.
    """
    t_len = int(t_len)
    if t_len < 2:
        raise RangeError(f"t_len must be >= 2, got {t_len}")
    n, k = params.n_stocks, params.n_sectors
    children = spawn_seeds(seed, 1 + k + n)
    market = np.random.default_rng(children[0]).standard_normal(t_len)
    sector_factors = np.stack(
        [np.random.default_rng(children[1 + j]).standard_normal(t_len) for j in range(k)]
    )
    noise = np.stack(
        [np.random.default_rng(children[1 + k + i]).standard_normal(t_len) for i in range(n)]
    )
    values = (
        params.beta[:, None] * market[None, :]
        + params.gamma[:, None] * sector_factors[params.sector_index]
        + params.sigma_idio[:, None] * noise
    )
    return ReturnMatrix(tuple(stock_tickers(n)), values, dt=1)


def population_matrix(params: FactorParams) -> np.ndarray:
    """Exact population correlation matrix implied by the strengths."""
    same_sector = params.sector_index[:, None] == params.sector_index[None, :]
    entries = np.outer(params.beta, params.beta)
    entries += np.where(same_sector, np.outer(params.gamma, params.gamma), 0.0)
    np.fill_diagonal(entries, 1.0)
    return entries


# ---------------------------------------------------------------------------
# analytic spectra
# ---------------------------------------------------------------------------


def analytic_spectrum_no_market(sizes, gammas) -> AnalyticSpectrum:
    """Closed-form spectrum for sector-only correlations (no market term).

    Sector k of size ``n_k`` and strength ``gamma_k`` contributes the large
    eigenvalue ``1 + (n_k - 1) gamma_k^2`` once and the small eigenvalue
    ``1 - gamma_k^2`` with multiplicity ``n_k - 1``.
    """
    sizes = tuple(int(s) for s in sizes)
    gammas = tuple(float(g) for g in np.atleast_1d(np.asarray(gammas, dtype=np.float64)))
    if not sizes or any(s < 1 for s in sizes):
        raise RangeError(f"sector sizes must be positive, got {sizes}")
    if len(gammas) != len(sizes):
        raise ValidationError(
            f"need one gamma per sector: {len(gammas)} gammas for {len(sizes)} sectors"
        )
    for g in gammas:
        _check_strength("gamma", g)
    large = tuple((1.0 + (n - 1) * g * g, 1) for n, g in zip(sizes, gammas))
    small = tuple((1.0 - g * g, n - 1) for n, g in zip(sizes, gammas) if n > 1)
    return AnalyticSpectrum(large, small)


def analytic_extremes(beta: float, gamma: float, sizes) -> tuple[float, float, float]:
    """Predicted spectrum extremes for a market-dominated sector model.

    Returns ``(lambda0, lambda1, bulk)`` with ``lambda0 = N beta^2``,
    ``lambda1 = n_largest (1 - beta^2)`` and ``bulk = 1 - beta^2 - gamma^2``,
    for uniform strengths. The formulas assume a dominant market term; with
    ``beta = 0`` they degenerate and a warning is issued (use
    :func:`analytic_spectrum_no_market` there instead).
    """
    beta = _check_strength("beta", beta)
    gamma = _check_strength("gamma", gamma)
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise RangeError(f"sector sizes must be positive, got {sizes}")
    if beta == 0.0:
        warnings.warn(
            "analytic extremes assume a dominant market term; with beta = 0 "
            "use analytic_spectrum_no_market instead",
            stacklevel=2,
        )
    n_total = sum(sizes)
    n_largest = max(sizes)
    lambda0 = n_total * beta * beta
    lambda1 = n_largest * (1.0 - beta * beta)
    bulk = 1.0 - beta * beta - gamma * gamma
    return (float(lambda0), float(lambda1), float(bulk))


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------


def sweep(
    sizes,
    gamma_grid,
    sigma_grid,
    width: float,
    t_len: int,
    seed: int,
) -> SweepResult:
    """Measure spectrum extremes over a (gamma, sigma) grid.

    Each grid point gets its own child of ``seed`` (one for the parameter
    draw, one for the simulation), assigned by grid position, so a skipped
    point never shifts the seeds of the points after it. Points whose means
    violate ``gamma^2 + sigma^2 <= 1`` are skipped and listed separately.

    Raises
    ------
    FeasibilityError
        If every grid point is infeasible.
    """
    # local import: the sweep drives the full analysis pipeline
    from .correlation import correlation_matrix
    from .returns import normalize
    from .spectrum import eigendecompose

    gammas = [float(g) for g in np.atleast_1d(np.asarray(gamma_grid, dtype=np.float64))]
    sigmas = [float(s) for s in np.atleast_1d(np.asarray(sigma_grid, dtype=np.float64))]
    if not gammas or not sigmas:
        raise RangeError("gamma_grid and sigma_grid must be non-empty")
    grid = [(g, s) for g in gammas for s in sigmas]
    children = spawn_seeds(seed, len(grid))

    points: list[SweepPoint] = []
    skipped: list[tuple[float, float]] = []
    for (gamma_mean, sigma_mean), child in zip(grid, children):
        if gamma_mean**2 + sigma_mean**2 > 1.0:
            skipped.append((gamma_mean, sigma_mean))
            continue
        param_seed, sim_seed = (int(x) for x in child.generate_state(2))
        params = sample_params(sizes, gamma_mean, sigma_mean, width, param_seed)
        simulated = simulate_returns(params, t_len, sim_seed)
        spec = eigendecompose(correlation_matrix(normalize(simulated)))
        points.append(
            SweepPoint(
                gamma=gamma_mean,
                sigma=sigma_mean,
                beta_sq_mean=float(np.mean(params.beta**2)),
                lambda0=float(spec.eigenvalues[0]),
                lambda1=float(spec.eigenvalues[1]),
            )
        )
    if not points:
        raise FeasibilityError("every grid point violates gamma^2 + sigma^2 <= 1")
    return SweepResult(tuple(points), tuple(skipped))
