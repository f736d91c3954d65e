"""Estimator front-ends over the functional analysis pipeline.

These follow scikit-learn conventions: hyperparameters in ``__init__``,
validated data in ``fit``, results in trailing-underscore attributes. The
samples-by-features orientation of scikit-learn applies, so ``X`` holds one
row per return observation and one column per asset, the transpose of the
internal (asset, time) layout.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from ._utils import check_square_symmetric, default_tickers
from .correlation import correlation_matrix
from .filtering import auto_n_group, decompose
from .network import (
    GROUP_SYMMETRY_ATOL,
    cluster_scan,
    connected_components,
    default_thresholds,
    select_threshold,
    threshold_adjacency,
)
from .returns import ReturnMatrix, normalize
from .spectrum import eigendecompose, ipr, mp_bounds


def _column_labels(X, n_features: int) -> tuple[str, ...]:
    columns = getattr(X, "columns", None)
    if columns is not None:
        labels = [str(c) for c in columns]
        if len(labels) == len(set(labels)) == n_features:
            return tuple(labels)
    return tuple(default_tickers(n_features))


class CorrelationSpectrum(BaseEstimator):
    """Correlation spectrum of a return panel with a random-matrix baseline.

    Fitting standardizes each asset's returns, builds the equal-time
    correlation matrix, decomposes it, and compares the eigenvalues with
    the Marchenko-Pastur support for the panel's observation ratio.

    Parameters
    ----------
    margin : float, default=0.0
        Relative widening of the upper Marchenko-Pastur bound when flagging
        deviating eigenvalues.

    Attributes
    ----------
    correlation_ : ndarray of shape (n_assets, n_assets)
        Equal-time correlation matrix.
    eigenvalues_ : ndarray of shape (n_assets,)
        Descending eigenvalues.
    eigenvectors_ : ndarray of shape (n_assets, n_assets)
        Column ``k`` is the eigenvector for ``eigenvalues_[k]``.
    ipr_ : ndarray of shape (n_assets,)
        Inverse participation ratio of each eigenvector.
    q_ : float
        Observation ratio ``n_samples / n_assets``.
    lambda_min_, lambda_max_ : float
        Marchenko-Pastur support bounds at ``q_``.
    deviating_ : list of int
        Indices of eigenvalues above the widened upper bound.
    n_group_ : int
        Deviating count minus the market mode, floored at zero.
    """

    def __init__(self, margin: float = 0.0):
        self.margin = margin

    def fit(self, X, y=None):
        """Fit on returns with shape (n_samples, n_assets)."""
        labels_source = X
        X = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
        n_samples, n_assets = X.shape
        self.n_features_in_ = n_assets
        self.tickers_ = _column_labels(labels_source, n_assets)

        returns = ReturnMatrix(self.tickers_, X.T, dt=1)
        corr = correlation_matrix(normalize(returns))
        spec = eigendecompose(corr)
        law = mp_bounds(spec.q)

        self.n_samples_ = n_samples
        self.correlation_ = corr.entries
        self.spectrum_ = spec
        self.eigenvalues_ = spec.eigenvalues
        self.eigenvectors_ = spec.eigenvectors
        self.ipr_ = np.array([ipr(spec.eigenvectors[:, k]) for k in range(n_assets)])
        self.q_ = float(spec.q)
        self.lambda_min_ = law.lambda_min
        self.lambda_max_ = law.lambda_max
        self.mp_law_ = law
        self.deviating_ = [
            k for k in range(n_assets)
            if spec.eigenvalues[k] > law.lambda_max * (1.0 + self.margin)
        ]
        self.n_group_ = max(0, len(self.deviating_) - 1)
        return self


class MarketModeFilter(BaseEstimator):
    """Split a return panel's correlation matrix into market, group, random.

    Parameters
    ----------
    n_group : int or "auto", default="auto"
        Number of group modes after the market mode. With ``"auto"`` the
        count comes from the eigenvalues deviating from the random bulk.
    margin : float, default=0.0
        Widening of the deviation cutoff used by ``"auto"``.

    Attributes
    ----------
    market_, group_, random_ : ndarray of shape (n_assets, n_assets)
        The three additive components of the correlation matrix.
    n_group_ : int
        Group-mode count actually used.
    correlation_ : ndarray of shape (n_assets, n_assets)
        The unfiltered correlation matrix (sum of the three parts).
    eigenvalues_ : ndarray of shape (n_assets,)
        Descending eigenvalues of the correlation matrix.
    """

    def __init__(self, n_group: int | str = "auto", margin: float = 0.0):
        self.n_group = n_group
        self.margin = margin

    def fit(self, X, y=None):
        """Fit on returns with shape (n_samples, n_assets)."""
        base = CorrelationSpectrum(margin=self.margin).fit(X)
        if self.n_group == "auto":
            n_group = auto_n_group(base.spectrum_, base.mp_law_, self.margin)
        else:
            n_group = int(self.n_group)
        parts = decompose(base.spectrum_, n_group)

        self.n_features_in_ = base.n_features_in_
        self.tickers_ = base.tickers_
        self.correlation_ = base.correlation_
        self.eigenvalues_ = base.eigenvalues_
        self.spectrum_ = base.spectrum_
        self.market_ = parts.market
        self.group_ = parts.group
        self.random_ = parts.random
        self.n_group_ = parts.n_group
        self.decomposition_ = parts
        return self


class ThresholdNetwork(ClusterMixin, BaseEstimator):
    """Cluster assets by thresholding a group correlation matrix.

    ``fit`` takes the (n_assets, n_assets) group matrix itself, for example
    ``MarketModeFilter(...).fit(returns).group_``, not a return panel.

    Parameters
    ----------
    threshold : float or "auto", default="auto"
        Edge threshold. With ``"auto"`` a scan over ``n_thresholds`` evenly
        spaced values picks the threshold with the most clusters, smallest
        threshold on ties.
    n_thresholds : int, default=200
        Grid size of the automatic scan.
    count_singletons : bool, default=False
        Count isolated nodes as clusters during the scan.

    Attributes
    ----------
    threshold_ : float
        Threshold actually used to build the network.
    adjacency_ : ndarray of bool, shape (n_assets, n_assets)
        Edge matrix at ``threshold_``.
    labels_ : ndarray of int, shape (n_assets,)
        Cluster index per asset, ordered by each cluster's smallest member;
        assets outside every multi-node cluster get ``-1``.
    n_clusters_ : int
        Number of multi-node clusters.
    scan_ : ClusterScan or None
        The scan behind the automatic choice; None for a fixed threshold.
    """

    def __init__(
        self,
        threshold: float | str = "auto",
        n_thresholds: int = 200,
        count_singletons: bool = False,
    ):
        self.threshold = threshold
        self.n_thresholds = n_thresholds
        self.count_singletons = count_singletons

    def fit(self, X, y=None):
        """Fit on a square symmetric group matrix of shape (n_assets, n_assets)."""
        labels_source = X
        X = check_array(X, dtype=np.float64, ensure_min_features=2)
        group = check_square_symmetric(X, GROUP_SYMMETRY_ATOL, "group matrix")
        n_assets = group.shape[0]
        self.n_features_in_ = n_assets
        self.tickers_ = _column_labels(labels_source, n_assets)

        if self.threshold == "auto":
            grid = default_thresholds(group, self.n_thresholds)
            self.scan_ = cluster_scan(
                group, grid, count_singletons=self.count_singletons, tickers=self.tickers_
            )
            self.threshold_ = select_threshold(self.scan_)
        else:
            self.scan_ = None
            self.threshold_ = float(self.threshold)

        network = threshold_adjacency(group, self.threshold_, tickers=self.tickers_)
        self.adjacency_ = network.edges
        labels = np.full(n_assets, -1, dtype=int)
        next_label = 0
        for members in connected_components(network):
            if len(members) >= 2:
                labels[members] = next_label
                next_label += 1
        self.labels_ = labels
        self.n_clusters_ = next_label
        return self
