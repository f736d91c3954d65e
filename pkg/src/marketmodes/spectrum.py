"""Eigenvalue spectra and the Marchenko-Pastur benchmark.

For N uncorrelated series of length T with Q = T/N >= 1, random matrix
theory gives the eigenvalue density of the sample correlation matrix

    p(x) = Q / (2 pi) * sqrt((x_max - x) (x - x_min)) / x

on the support [x_min, x_max], with bounds x = (1 +- 1/sqrt(Q))^2. Market
data deviate from this law in a characteristic way: a single dominant
eigenvalue far above the bulk (the market mode), a handful of intermediate
ones carrying sector structure, and a bulk consistent with noise. The
inverse participation ratio

    I_k = sum_i u_ki^4

measures how many components effectively contribute to eigenvector k: 1/N
for a uniform vector, 1 for a vector localized on one stock, and about 3/N
on average for random-matrix eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._utils import SYMMETRY_ATOL, spawn_seeds
from .correlation import CorrMatrix, correlation_matrix
from .errors import MarketModesError, RangeError, ValidationError
from .prices import SectorMap
from .returns import NormalizedReturns

# Numerical slack for orthonormality, reconstruction and PSD checks.
SPECTRUM_ATOL = 1e-8


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues and eigenvectors of a correlation matrix.

    Attributes
    ----------
    tickers : tuple of str
        Asset labels, aligned with eigenvector components.
    eigenvalues : ndarray of shape (n_assets,)
        Sorted in descending order. Their sum equals ``n_assets`` because a
        correlation matrix has unit trace per asset.
    eigenvectors : ndarray of shape (n_assets, n_assets)
        Column k is the unit eigenvector for ``eigenvalues[k]``, oriented so
        that the sum of its components is nonnegative (ties resolved by
        making the first nonzero component positive).
    n_obs : int or None
        Number of return observations behind the matrix; defines
        ``q = n_obs / n_assets`` for the random-matrix comparison.
    """

    tickers: tuple[str, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_obs: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        values = np.array(self.eigenvalues, dtype=np.float64)
        vectors = np.array(self.eigenvectors, dtype=np.float64)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "eigenvectors", vectors)
        n = len(self.tickers)
        if values.shape != (n,) or vectors.shape != (n, n):
            raise ValidationError(
                f"expected {n} eigenvalues and a {n}x{n} eigenvector matrix, "
                f"got {values.shape} and {vectors.shape}"
            )
        if np.any(values[:-1] < values[1:]):
            raise ValidationError("eigenvalues must be sorted in descending order")

    @property
    def n_assets(self) -> int:
        return self.eigenvalues.size

    @property
    def source_dims(self) -> tuple[int, int | None]:
        return (self.n_assets, self.n_obs)

    @property
    def q(self) -> float | None:
        """Observation-to-asset ratio T/N, or None if T is unknown."""
        if self.n_obs is None:
            return None
        return self.n_obs / self.n_assets


@dataclass(frozen=True)
class MpLaw:
    """Marchenko-Pastur support for observation ratio ``q = T/N``."""

    q: float
    lambda_min: float
    lambda_max: float


@dataclass(frozen=True)
class EigenvectorEntry:
    """One component of an eigenvector, annotated for reporting."""

    ticker: str
    sector: str
    component: float
    abs_component: float


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Orient each column so its component sum is nonnegative."""
    vectors = vectors.copy()
    for k in range(vectors.shape[1]):
        total = vectors[:, k].sum()
        if total < 0.0:
            vectors[:, k] = -vectors[:, k]
        elif total == 0.0:
            nonzero = np.nonzero(vectors[:, k])[0]
            if nonzero.size and vectors[nonzero[0], k] < 0.0:
                vectors[:, k] = -vectors[:, k]
    return vectors


def eigendecompose(corr: CorrMatrix) -> Spectrum:
    """Full eigendecomposition of a correlation matrix.

    The output satisfies, up to ``1e-8``: orthonormal eigenvectors, exact
    reconstruction ``sum_k lambda_k u_k u_k^T = C`` in max norm, and a
    smallest eigenvalue above ``-1e-8`` (positive semidefiniteness).

    Raises
    ------
    ValidationError
        If the matrix entries were mutated into an asymmetric or indefinite
        state after construction.
    """
    entries = corr.entries
    asym = np.max(np.abs(entries - entries.T))
    if asym > SYMMETRY_ATOL:
        raise ValidationError(
            f"correlation matrix is not symmetric: max asymmetry {asym:.3e}"
        )
    values, vectors = np.linalg.eigh(entries)
    if values[0] < -SPECTRUM_ATOL:
        raise ValidationError(
            f"matrix is not positive semidefinite: smallest eigenvalue {values[0]:.3e}"
        )
    values = values[::-1].copy()
    vectors = _fix_signs(vectors[:, ::-1])

    gram_error = np.max(np.abs(vectors.T @ vectors - np.eye(corr.n_assets)))
    rebuilt = (vectors * values) @ vectors.T
    rebuild_error = np.max(np.abs(rebuilt - entries))
    if gram_error > SPECTRUM_ATOL or rebuild_error > SPECTRUM_ATOL:
        raise MarketModesError(
            f"eigendecomposition failed verification: orthonormality error "
            f"{gram_error:.3e}, reconstruction error {rebuild_error:.3e}"
        )
    return Spectrum(corr.tickers, values, vectors, n_obs=corr.n_obs)


def mp_bounds(q: float) -> MpLaw:
    """Support bounds ``(1 +- 1/sqrt(q))^2`` of the Marchenko-Pastur law.

    Raises
    ------
    RangeError
        If ``q < 1``; with fewer observations than assets the correlation
        matrix is singular and the law takes a different form.
    """
    q = float(q)
    if q < 1.0:
        raise RangeError(f"q = T/N must be >= 1, got {q}")
    root = 1.0 / np.sqrt(q)
    return MpLaw(q, (1.0 - root) ** 2, (1.0 + root) ** 2)


def mp_density(lam, law: MpLaw):
    """Marchenko-Pastur eigenvalue density, zero outside the open support.

    Accepts a scalar or an array; returns the same shape. The density at
    the support edges is 0 (the square root vanishes there).
    """
    lam_arr = np.asarray(lam, dtype=np.float64)
    out = np.zeros_like(lam_arr)
    inside = (lam_arr > law.lambda_min) & (lam_arr < law.lambda_max)
    x = lam_arr[inside]
    out[inside] = (
        law.q
        / (2.0 * np.pi)
        * np.sqrt((law.lambda_max - x) * (x - law.lambda_min))
        / x
    )
    if np.isscalar(lam) or lam_arr.ndim == 0:
        return float(out)
    return out


def shuffle_surrogate(normalized: NormalizedReturns, seed: int) -> CorrMatrix:
    """Correlation matrix after shuffling each return series independently.

    Permuting every row with its own random stream destroys all equal-time
    cross-correlations while keeping each marginal distribution intact, so
    the surrogate spectrum shows what pure noise looks like at this N and T.
    """
    t_len = normalized.n_returns
    shuffled = np.empty_like(normalized.values)
    for i, child in enumerate(spawn_seeds(seed, normalized.n_stocks)):
        rng = np.random.default_rng(child)
        shuffled[i] = normalized.values[i, rng.permutation(t_len)]
    surrogate = NormalizedReturns(
        normalized.tickers, shuffled, normalized.means, normalized.sigmas
    )
    return correlation_matrix(surrogate)


def deviating_eigenvalues(
    spectrum: Spectrum, law: MpLaw, margin: float = 0.0
) -> list[int]:
    """Indices of eigenvalues above the random bulk.

    An eigenvalue deviates when it exceeds ``lambda_max * (1 + margin)``;
    the strict inequality means a margin of 0 flags anything above the
    bound itself.
    """
    margin = float(margin)
    if margin < 0.0:
        raise RangeError(f"margin must be >= 0, got {margin}")
    cutoff = law.lambda_max * (1.0 + margin)
    return [k for k, value in enumerate(spectrum.eigenvalues) if value > cutoff]


def ipr(vector) -> float:
    """Inverse participation ratio ``sum_i u_i^4`` of a unit vector.

    Raises
    ------
    ValidationError
        If the vector is not normalized to unit length within ``1e-8``.
    """
    u = np.asarray(vector, dtype=np.float64).ravel()
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > SPECTRUM_ATOL:
        raise ValidationError(f"eigenvector must have unit norm, got {norm:.6f}")
    return float(np.sum(u**4))


def eigenvector_report(
    spectrum: Spectrum, sectors: SectorMap, k: int
) -> list[EigenvectorEntry]:
    """Components of eigenvector ``k`` annotated with sectors.

    Rows are sorted by sector label and then by ticker, which groups the
    entries the way sector-structure plots are read.

    Raises
    ------
    RangeError
        If ``k`` is outside ``0..n_assets - 1``.
    """
    k = int(k)
    if not 0 <= k < spectrum.n_assets:
        raise RangeError(f"k must be in [0, {spectrum.n_assets - 1}], got {k}")
    sectors.require_cover(spectrum.tickers)
    column = spectrum.eigenvectors[:, k]
    entries = [
        EigenvectorEntry(
            ticker=ticker,
            sector=sectors.sector_of(ticker),
            component=float(column[i]),
            abs_component=float(abs(column[i])),
        )
        for i, ticker in enumerate(spectrum.tickers)
    ]
    entries.sort(key=lambda e: (e.sector, e.ticker))
    return entries
