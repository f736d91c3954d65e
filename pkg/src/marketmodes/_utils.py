"""Small shared helpers: matrix checks, triangles, seed trees."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

# Symmetry tolerance for matrices produced by this package.
SYMMETRY_ATOL = 1e-12


def as_float_matrix(values, name: str) -> np.ndarray:
    """Return ``values`` as a contiguous float64 2-D array, validating shape."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    return np.ascontiguousarray(arr)


def check_square_symmetric(matrix: np.ndarray, atol: float, name: str) -> np.ndarray:
    """Validate that ``matrix`` is square and symmetric within ``atol``."""
    arr = as_float_matrix(matrix, name)
    n, m = arr.shape
    if n != m:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    asym = np.max(np.abs(arr - arr.T)) if n else 0.0
    if asym > atol:
        raise ValidationError(
            f"{name} is not symmetric: max |M - M.T| = {asym:.3e} exceeds {atol:.1e}"
        )
    return arr


def upper_triangle(matrix: np.ndarray) -> np.ndarray:
    """Strictly upper-triangular entries of a square matrix, row-major order."""
    n = matrix.shape[0]
    iu = np.triu_indices(n, k=1)
    return matrix[iu]


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seed sequences from one integer seed."""
    return np.random.SeedSequence(seed).spawn(n)


def default_tickers(n: int) -> list[str]:
    """Placeholder asset labels used when no tickers accompany a matrix."""
    width = max(3, len(str(max(n - 1, 0))))
    return [f"S{i:0{width}d}" for i in range(n)]
