"""Eigendecomposition, the Marchenko-Pastur law, surrogates and the IPR."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from marketmodes.correlation import CorrMatrix, correlation_matrix
from marketmodes.errors import RangeError, ValidationError
from marketmodes.factor_model import population_matrix
from marketmodes.prices import SectorMap
from marketmodes.returns import ReturnMatrix, normalize
from marketmodes.spectrum import (
    Spectrum,
    deviating_eigenvalues,
    eigendecompose,
    eigenvector_report,
    ipr,
    mp_bounds,
    mp_density,
    shuffle_surrogate,
)


def uniform_corr(n: int, c: float) -> CorrMatrix:
    entries = np.full((n, n), c)
    np.fill_diagonal(entries, 1.0)
    return CorrMatrix(tuple(f"T{i:03d}" for i in range(n)), entries, n_obs=13 * n)


# ---------------------------------------------------------------------------
# eigendecompose
# ---------------------------------------------------------------------------


def test_identity_spectrum_is_flat():
    spec = eigendecompose(CorrMatrix(tuple("ABCDE"), np.eye(5), n_obs=100))
    assert_allclose(spec.eigenvalues, np.ones(5), rtol=0.0, atol=1e-12)
    assert_allclose(spec.eigenvectors.T @ spec.eigenvectors, np.eye(5),
                    rtol=0.0, atol=1e-12)


def test_two_by_two_analytic():
    spec = eigendecompose(uniform_corr(2, 0.5))
    assert_allclose(spec.eigenvalues, [1.5, 0.5], rtol=0.0, atol=1e-12)
    spec = eigendecompose(uniform_corr(2, -0.3))
    assert_allclose(spec.eigenvalues, [1.3, 0.7], rtol=0.0, atol=1e-12)


def test_uniform_matrix_market_eigenvalue():
    corr = uniform_corr(201, 0.22)
    spec = eigendecompose(corr)
    assert_allclose(spec.eigenvalues[0], 45.0, rtol=0.0, atol=1e-8)
    assert_allclose(spec.eigenvalues[1:], np.full(200, 0.78), rtol=0.0, atol=1e-8)
    # substitution oracle: the top pair must satisfy C u = lambda u directly
    u0 = spec.eigenvectors[:, 0]
    residual = corr.entries @ u0 - spec.eigenvalues[0] * u0
    assert np.max(np.abs(residual)) <= 1e-8


def test_spectrum_invariants(three_sector_pipeline):
    _, corr, spec, _ = three_sector_pipeline
    n = spec.n_assets
    assert np.all(np.diff(spec.eigenvalues) <= 0.0)
    assert_allclose(spec.eigenvalues.sum(), n, rtol=0.0, atol=1e-8)
    assert spec.eigenvalues[-1] >= -1e-8
    assert np.max(np.abs(spec.eigenvectors.T @ spec.eigenvectors - np.eye(n))) <= 1e-8
    rebuilt = (spec.eigenvectors * spec.eigenvalues) @ spec.eigenvectors.T
    assert np.max(np.abs(rebuilt - corr.entries)) <= 1e-8
    assert spec.q == corr.n_obs / n
    assert spec.source_dims == (n, corr.n_obs)


def test_sign_convention_component_sums_nonnegative(three_sector_pipeline):
    _, _, spec, _ = three_sector_pipeline
    sums = spec.eigenvectors.sum(axis=0)
    assert np.all(sums >= 0.0)


def test_permutation_equivariance(three_sector_pipeline):
    _, corr, spec, _ = three_sector_pipeline
    rng = np.random.default_rng(12)
    perm = rng.permutation(spec.n_assets)
    permuted = CorrMatrix(
        tuple(corr.tickers[i] for i in perm),
        corr.entries[np.ix_(perm, perm)],
        n_obs=corr.n_obs,
    )
    spec_p = eigendecompose(permuted)
    assert_allclose(spec_p.eigenvalues, spec.eigenvalues, rtol=0.0, atol=1e-10)
    # market mode is non-degenerate: its projector must commute with the relabeling
    p0 = np.outer(spec.eigenvectors[:, 0], spec.eigenvectors[:, 0])
    p0_p = np.outer(spec_p.eigenvectors[:, 0], spec_p.eigenvectors[:, 0])
    assert_allclose(p0_p, p0[np.ix_(perm, perm)], rtol=0.0, atol=1e-10)


def test_eigendecompose_rejects_mutated_matrix():
    corr = uniform_corr(4, 0.2)
    corr.entries[0, 1] += 1e-6
    with pytest.raises(ValidationError, match="symmetric"):
        eigendecompose(corr)


def test_spectrum_type_validation():
    with pytest.raises(ValidationError, match="descending"):
        Spectrum(("A", "B"), np.array([0.5, 1.5]), np.eye(2))
    with pytest.raises(ValidationError):
        Spectrum(("A", "B"), np.array([1.0, 1.0, 1.0]), np.eye(2))


# ---------------------------------------------------------------------------
# Marchenko-Pastur law
# ---------------------------------------------------------------------------


def test_mp_bounds_daily_panel_ratio():
    law = mp_bounds(12.97)
    assert abs(law.lambda_min - 0.52) <= 0.01
    assert abs(law.lambda_max - 1.63) <= 0.01


def test_mp_bounds_formula_cases():
    law = mp_bounds(1.0)
    assert law.lambda_min == 0.0
    assert law.lambda_max == 4.0
    law = mp_bounds(4.0)
    assert_allclose((law.lambda_min, law.lambda_max), (0.25, 2.25), rtol=0.0, atol=1e-15)
    law = mp_bounds(1e6)
    # support collapses onto 1 as q grows, at rate 2 / sqrt(q)
    assert abs(law.lambda_min - 1.0) < 0.003
    assert abs(law.lambda_max - 1.0) < 0.003


def test_mp_bounds_rejects_q_below_one():
    with pytest.raises(RangeError):
        mp_bounds(0.99)


def test_mp_density_support():
    law = mp_bounds(2.0)
    assert mp_density(law.lambda_min - 0.1, law) == 0.0
    assert mp_density(law.lambda_max + 0.1, law) == 0.0
    assert mp_density(law.lambda_min, law) == 0.0
    assert mp_density(law.lambda_max, law) == 0.0
    assert mp_density(1.0, law) > 0.0
    grid = np.linspace(0.0, 4.0, 101)
    values = mp_density(grid, law)
    assert values.shape == grid.shape
    assert np.all(values >= 0.0)


def test_mp_density_normalizes():
    law = mp_bounds(2.0)
    total, err = integrate.quad(lambda x: mp_density(x, law),
                                law.lambda_min, law.lambda_max, limit=200)
    assert abs(total - 1.0) <= 1e-6
    assert err < 1e-6


# ---------------------------------------------------------------------------
# shuffled surrogates
# ---------------------------------------------------------------------------


def test_surrogate_single_stock_trivial():
    values = np.random.default_rng(0).normal(size=(1, 50))
    normalized = normalize(ReturnMatrix(("A",), values))
    surrogate = shuffle_surrogate(normalized, seed=1)
    assert_allclose(surrogate.entries, [[1.0]], rtol=0.0, atol=0.0)


def test_surrogate_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(1)
    normalized = normalize(ReturnMatrix(tuple(f"T{i}" for i in range(5)),
                                        rng.normal(size=(5, 120))))
    a = shuffle_surrogate(normalized, seed=3)
    b = shuffle_surrogate(normalized, seed=3)
    c = shuffle_surrogate(normalized, seed=4)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


def test_surrogate_destroys_cross_correlation():
    # identical series correlate at 1; independent per-stock shuffles break it
    base = np.random.default_rng(2).normal(size=2000)
    normalized = normalize(ReturnMatrix(("A", "B"), np.vstack([base, base])))
    surrogate = shuffle_surrogate(normalized, seed=5)
    assert abs(surrogate.entries[0, 1]) < 0.1


def test_surrogate_preserves_marginals():
    rng = np.random.default_rng(3)
    normalized = normalize(ReturnMatrix(tuple(f"T{i}" for i in range(4)),
                                        rng.normal(size=(4, 200))))
    surrogate = shuffle_surrogate(normalized, seed=6)
    assert surrogate.n_obs == normalized.n_returns
    # permutation invariance of the moments: stds recorded unchanged
    assert np.array_equal(surrogate.tickers, normalized.tickers)


def test_surrogate_bulk_inside_mp_support():
    rng = np.random.default_rng(4)
    n, t = 100, 1000
    normalized = normalize(ReturnMatrix(tuple(f"T{i}" for i in range(n)),
                                        rng.normal(size=(n, t))))
    spec = eigendecompose(shuffle_surrogate(normalized, seed=7))
    law = mp_bounds(t / n)
    inside = (spec.eigenvalues >= 0.95 * law.lambda_min) & \
             (spec.eigenvalues <= 1.05 * law.lambda_max)
    assert inside.mean() >= 0.99


# ---------------------------------------------------------------------------
# deviating eigenvalues
# ---------------------------------------------------------------------------


def test_deviating_identity_none():
    spec = eigendecompose(CorrMatrix(tuple("ABCDE"), np.eye(5), n_obs=100))
    law = mp_bounds(12.97)
    assert deviating_eigenvalues(spec, law) == []


def test_deviating_uniform_market_only():
    spec = eigendecompose(uniform_corr(201, 0.22))
    law = mp_bounds(12.97)
    assert deviating_eigenvalues(spec, law) == [0]


def test_deviating_margin_behavior():
    spec = eigendecompose(uniform_corr(201, 0.22))
    law = mp_bounds(12.97)
    assert deviating_eigenvalues(spec, law, margin=30.0) == []
    with pytest.raises(RangeError):
        deviating_eigenvalues(spec, law, margin=-0.1)


def test_deviating_count_matches_population_oracle(ten_sector_market):
    # market + K sectors: the population matrix (beta^2 everywhere, plus
    # gamma^2 within sectors) has exactly K eigenvalues above the bulk:
    # the market mode and K-1 sector contrasts
    params, spec, law = ten_sector_market
    exact = np.linalg.eigvalsh(population_matrix(params))
    expected = int((exact > law.lambda_max).sum())
    assert expected == params.n_sectors == 10
    observed = deviating_eigenvalues(spec, law)
    assert observed == list(range(10))


# ---------------------------------------------------------------------------
# inverse participation ratio
# ---------------------------------------------------------------------------


def test_ipr_uniform_vector():
    n = 201
    assert_allclose(ipr(np.full(n, 1.0 / np.sqrt(n))), 1.0 / n, rtol=0.0, atol=1e-12)


def test_ipr_localized_vector():
    u = np.zeros(50)
    u[7] = 1.0
    assert ipr(u) == 1.0


def test_ipr_bounds_hold_for_every_eigenvector(three_sector_pipeline):
    _, _, spec, _ = three_sector_pipeline
    n = spec.n_assets
    values = [ipr(spec.eigenvectors[:, k]) for k in range(n)]
    assert min(values) >= 1.0 / n - 1e-12
    assert max(values) <= 1.0 + 1e-12


def test_ipr_rejects_unnormalized_vector():
    with pytest.raises(ValidationError, match="unit norm"):
        ipr(np.ones(4))


def test_ipr_random_vectors_average_three_over_n():
    rng = np.random.default_rng(8)
    n, t = 100, 1000
    normalized = normalize(ReturnMatrix(tuple(f"T{i}" for i in range(n)),
                                        rng.normal(size=(n, t))))
    spec = eigendecompose(shuffle_surrogate(normalized, seed=9))
    mean_ipr = np.mean([ipr(spec.eigenvectors[:, k]) for k in range(n)])
    assert abs(mean_ipr - 3.0 / n) / (3.0 / n) < 0.25


# ---------------------------------------------------------------------------
# eigenvector reports
# ---------------------------------------------------------------------------


def test_report_uniform_market_mode_components():
    n = 30
    spec = eigendecompose(uniform_corr(n, 0.4))
    sectors = SectorMap.uniform(spec.tickers)
    report = eigenvector_report(spec, sectors, 0)
    expected = 1.0 / np.sqrt(n)
    for entry in report:
        assert abs(entry.abs_component - expected) < 1e-10


def test_report_market_mode_single_signed(three_sector_pipeline, three_sector_sectors):
    _, _, spec, _ = three_sector_pipeline
    report = eigenvector_report(spec, three_sector_sectors, 0)
    signs = {np.sign(entry.component) for entry in report}
    assert signs == {1.0}


def test_report_sector_mode_concentrates(three_sector_pipeline, three_sector_sectors):
    _, _, spec, _ = three_sector_pipeline
    report = eigenvector_report(spec, three_sector_sectors, 1)
    weight = {}
    for entry in report:
        weight[entry.sector] = weight.get(entry.sector, 0.0) + entry.component**2
    assert max(weight.values()) >= 0.6


def test_report_sorted_by_sector_then_ticker(three_sector_pipeline, three_sector_sectors):
    _, _, spec, _ = three_sector_pipeline
    report = eigenvector_report(spec, three_sector_sectors, 2)
    keys = [(entry.sector, entry.ticker) for entry in report]
    assert keys == sorted(keys)
    assert len(report) == spec.n_assets


def test_report_k_out_of_range(three_sector_pipeline, three_sector_sectors):
    _, _, spec, _ = three_sector_pipeline
    with pytest.raises(RangeError):
        eigenvector_report(spec, three_sector_sectors, spec.n_assets)
    with pytest.raises(RangeError):
        eigenvector_report(spec, three_sector_sectors, -1)
