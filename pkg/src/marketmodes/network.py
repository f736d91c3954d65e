"""Threshold networks over the group correlation matrix.

Joining two stocks whenever their group correlation exceeds a threshold
turns the filtered matrix into a graph. Scanning the threshold maps out how
the graph breaks up: too low and everything is one blob, too high and only
isolated nodes remain. In between, the number of multi-stock clusters peaks;
the threshold that maximizes it is the natural operating point, and the
clusters there line up with business sectors when the group modes carry
sector structure.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ._utils import check_square_symmetric, default_tickers, upper_triangle
from .errors import RangeError, ValidationError
from .prices import SectorMap

# Group matrices come out of floating-point eigenmode sums, so their
# symmetry tolerance is looser than for freshly built correlation matrices.
GROUP_SYMMETRY_ATOL = 1e-9
DEFAULT_N_THRESHOLDS = 200


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Undirected, unweighted graph over the tickers."""

    tickers: tuple[str, ...]
    edges: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", tuple(self.tickers))
        edges = np.array(self.edges, dtype=bool)
        object.__setattr__(self, "edges", edges)
        n = len(self.tickers)
        if edges.shape != (n, n):
            raise ValidationError(f"edges must be {n}x{n}, got {edges.shape}")
        if np.any(edges != edges.T):
            raise ValidationError("adjacency matrix must be symmetric")
        if np.any(np.diag(edges)):
            raise ValidationError("adjacency matrix must have an empty diagonal")

    @property
    def n_nodes(self) -> int:
        return len(self.tickers)

    @property
    def n_edges(self) -> int:
        return int(self.edges.sum()) // 2


@dataclass(frozen=True, eq=False)
class ClusterScan:
    """Cluster, node and edge counts along an ascending threshold grid."""

    thresholds: np.ndarray
    cluster_counts: np.ndarray
    node_counts: np.ndarray
    edge_counts: np.ndarray
    count_singletons: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "thresholds", np.array(self.thresholds, dtype=np.float64))
        object.__setattr__(self, "cluster_counts", np.array(self.cluster_counts, dtype=np.int64))
        object.__setattr__(self, "node_counts", np.array(self.node_counts, dtype=np.int64))
        object.__setattr__(self, "edge_counts", np.array(self.edge_counts, dtype=np.int64))
        n = self.thresholds.size
        for name in ("cluster_counts", "node_counts", "edge_counts"):
            if getattr(self, name).shape != (n,):
                raise ValidationError(f"{name} must have one entry per threshold")


@dataclass(frozen=True)
class ClusterInfo:
    """Summary of one cluster: membership, internal edges, sector makeup."""

    members: tuple[str, ...]
    size: int
    n_edges: int
    sector_counts: dict[str, int]
    dominant_sector: str
    purity: float


def _symmetrized_group(group, tickers) -> tuple[np.ndarray, tuple[str, ...]]:
    matrix = check_square_symmetric(group, GROUP_SYMMETRY_ATOL, "group matrix")
    matrix = (matrix + matrix.T) / 2.0
    n = matrix.shape[0]
    if tickers is None:
        labels = tuple(default_tickers(n))
    else:
        labels = tuple(tickers)
        if len(labels) != n:
            raise ValidationError(f"got {len(labels)} tickers for a {n}x{n} matrix")
    return matrix, labels


def threshold_adjacency(group, threshold: float, tickers=None) -> AdjacencyMatrix:
    """Graph with an edge wherever the group entry strictly exceeds the threshold.

    The strict inequality means entries equal to the threshold do not create
    edges. The diagonal never does.

    Raises
    ------
    ValidationError
        If the matrix is asymmetric beyond ``1e-9``.
    """
    matrix, labels = _symmetrized_group(group, tickers)
    edges = matrix > float(threshold)
    np.fill_diagonal(edges, False)
    return AdjacencyMatrix(labels, edges)


def connected_components(adjacency: AdjacencyMatrix) -> list[list[int]]:
    """Partition of all node indices into maximal connected sets.

    Isolated nodes appear as singleton components. Components are listed in
    order of their smallest member, each sorted internally, so the output
    is deterministic.
    """
    edges = adjacency.edges
    n = adjacency.n_nodes
    visited = np.zeros(n, dtype=bool)
    components: list[list[int]] = []
    for start in range(n):
        if visited[start]:
            continue
        visited[start] = True
        frontier = [start]
        members = []
        while frontier:
            node = frontier.pop()
            members.append(node)
            neighbors = np.nonzero(edges[node] & ~visited)[0]
            visited[neighbors] = True
            frontier.extend(neighbors.tolist())
        components.append(sorted(members))
    return components


def _count_clusters(components: list[list[int]], count_singletons: bool) -> int:
    if count_singletons:
        return len(components)
    return sum(1 for members in components if len(members) >= 2)


def cluster_scan(
    group,
    thresholds,
    count_singletons: bool = False,
    tickers=None,
) -> ClusterScan:
    """Cluster, node and edge counts at each threshold of an ascending grid.

    A cluster is a connected component with at least two nodes unless
    ``count_singletons`` is set; a node counts as present when it has at
    least one edge.

    Raises
    ------
    RangeError
        If the thresholds are not in ascending order.
    """
    grid = np.asarray(thresholds, dtype=np.float64).ravel()
    if grid.size == 0:
        raise RangeError("threshold grid must not be empty")
    if np.any(np.diff(grid) < 0.0):
        raise RangeError("thresholds must be in ascending order")
    matrix, labels = _symmetrized_group(group, tickers)

    clusters = np.empty(grid.size, dtype=np.int64)
    nodes = np.empty(grid.size, dtype=np.int64)
    edge_totals = np.empty(grid.size, dtype=np.int64)
    for j, cut in enumerate(grid):
        edges = matrix > cut
        np.fill_diagonal(edges, False)
        adjacency = AdjacencyMatrix(labels, edges)
        components = connected_components(adjacency)
        clusters[j] = _count_clusters(components, count_singletons)
        degrees = edges.sum(axis=1)
        nodes[j] = int((degrees > 0).sum())
        edge_totals[j] = adjacency.n_edges
    return ClusterScan(grid, clusters, nodes, edge_totals, count_singletons)


def default_thresholds(group, n_thresholds: int = DEFAULT_N_THRESHOLDS) -> np.ndarray:
    """Evenly spaced grid spanning the off-diagonal range of the group matrix."""
    n_thresholds = int(n_thresholds)
    if n_thresholds < 1:
        raise RangeError(f"n_thresholds must be >= 1, got {n_thresholds}")
    matrix, _ = _symmetrized_group(group, None)
    offdiag = upper_triangle(matrix)
    return np.linspace(float(offdiag.min()), float(offdiag.max()), n_thresholds)


def select_threshold(scan: ClusterScan) -> float:
    """Threshold with the most clusters; ties go to the smallest threshold."""
    best = int(np.argmax(scan.cluster_counts))
    return float(scan.thresholds[best])


def network_report(
    adjacency: AdjacencyMatrix,
    sectors: SectorMap,
    count_singletons: bool = False,
) -> list[ClusterInfo]:
    """Per-cluster membership, edge count, sector histogram and purity.

    Purity is the share of the dominant sector within the cluster; ties on
    the dominant sector resolve to the lexicographically smallest label.
    """
    sectors.require_cover(adjacency.tickers)
    reports: list[ClusterInfo] = []
    for members in connected_components(adjacency):
        if len(members) < 2 and not count_singletons:
            continue
        tickers = tuple(adjacency.tickers[i] for i in members)
        block = adjacency.edges[np.ix_(members, members)]
        counts = Counter(sectors.sector_of(t) for t in tickers)
        dominant = min(counts, key=lambda label: (-counts[label], label))
        reports.append(
            ClusterInfo(
                members=tickers,
                size=len(tickers),
                n_edges=int(block.sum()) // 2,
                sector_counts=dict(sorted(counts.items())),
                dominant_sector=dominant,
                purity=counts[dominant] / len(tickers),
            )
        )
    return reports
