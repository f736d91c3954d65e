"""Writers for the delimited output files and the run manifest.

Floats are written with ``repr``, the shortest round-trip form, so repeated
runs with the same inputs and seeds produce byte-identical files. Manifests
are JSON with sorted keys and no timestamps for the same reason.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .correlation import Histogram
from .factor_model import SweepPoint
from .filtering import ModeDecomposition
from .network import AdjacencyMatrix, ClusterInfo, ClusterScan
from .prices import SectorMap
from .spectrum import MpLaw, Spectrum, eigenvector_report, ipr, mp_density

MP_CURVE_POINTS = 512


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_histogram(path, histogram: Histogram) -> None:
    """One row per bin: ``bin_lo,bin_hi,count,density``."""
    edges = histogram.bin_edges
    rows = (
        (_fmt(edges[i]), _fmt(edges[i + 1]), str(int(histogram.counts[i])), _fmt(histogram.density[i]))
        for i in range(histogram.counts.size)
    )
    _write_rows(path, "bin_lo,bin_hi,count,density", rows)


def write_component_histograms(path, histograms: dict[str, Histogram]) -> None:
    """Stacked per-component histograms sharing one bin grid."""
    def rows():
        for name, histogram in histograms.items():
            edges = histogram.bin_edges
            for i in range(histogram.counts.size):
                yield (
                    name,
                    _fmt(edges[i]),
                    _fmt(edges[i + 1]),
                    str(int(histogram.counts[i])),
                    _fmt(histogram.density[i]),
                )
    _write_rows(path, "component,bin_lo,bin_hi,count,density", rows())


def write_spectrum(path, spectrum: Spectrum) -> None:
    """Eigenvalue table with localization: ``k,lambda,ipr``."""
    rows = (
        (str(k), _fmt(spectrum.eigenvalues[k]), _fmt(ipr(spectrum.eigenvectors[:, k])))
        for k in range(spectrum.n_assets)
    )
    _write_rows(path, "k,lambda,ipr", rows)


def write_mp_density(path, law: MpLaw, n_points: int = MP_CURVE_POINTS) -> None:
    """Density curve sampled evenly across the support: ``lambda,density``."""
    grid = np.linspace(law.lambda_min, law.lambda_max, int(n_points))
    values = mp_density(grid, law)
    rows = ((_fmt(x), _fmt(y)) for x, y in zip(grid, values))
    _write_rows(path, "lambda,density", rows)


def write_eigenvector_modes(path, spectrum: Spectrum, sectors: SectorMap, modes) -> None:
    """Sector-sorted components of several eigenvectors, stacked by mode."""
    def rows():
        for k in modes:
            for entry in eigenvector_report(spectrum, sectors, k):
                yield (
                    str(k),
                    entry.ticker,
                    entry.sector,
                    _fmt(entry.component),
                    _fmt(entry.abs_component),
                )
    _write_rows(path, "mode,ticker,sector,component,abs_component", rows())


def write_cluster_scan(path, scan: ClusterScan) -> None:
    """Scan table: ``c_th,clusters,nodes,edges``."""
    rows = (
        (
            _fmt(scan.thresholds[j]),
            str(int(scan.cluster_counts[j])),
            str(int(scan.node_counts[j])),
            str(int(scan.edge_counts[j])),
        )
        for j in range(scan.thresholds.size)
    )
    _write_rows(path, "c_th,clusters,nodes,edges", rows)


def write_edge_list(path, adjacency: AdjacencyMatrix, weights) -> None:
    """Edges with their group-correlation weights: ``ticker_a,ticker_b,weight``."""
    weights = np.asarray(weights, dtype=np.float64)
    def rows():
        n = adjacency.n_nodes
        for i in range(n):
            for j in range(i + 1, n):
                if adjacency.edges[i, j]:
                    yield (adjacency.tickers[i], adjacency.tickers[j], _fmt(weights[i, j]))
    _write_rows(path, "ticker_a,ticker_b,weight", rows())


def write_cluster_report(path, clusters: list[ClusterInfo]) -> None:
    """Per-cluster summary; sector counts and members are ';'-packed."""
    def rows():
        for idx, info in enumerate(clusters):
            packed_sectors = ";".join(f"{k}:{v}" for k, v in info.sector_counts.items())
            yield (
                str(idx),
                str(info.size),
                str(info.n_edges),
                _fmt(info.purity),
                info.dominant_sector,
                packed_sectors,
                ";".join(info.members),
            )
    _write_rows(path, "cluster,size,edges,purity,dominant_sector,sector_counts,members", rows())


def write_sweep(path, points: tuple[SweepPoint, ...]) -> None:
    """Sweep surface: ``gamma,sigma,beta_sq_mean,lambda0,lambda1``."""
    rows = (
        (_fmt(p.gamma), _fmt(p.sigma), _fmt(p.beta_sq_mean), _fmt(p.lambda0), _fmt(p.lambda1))
        for p in points
    )
    _write_rows(path, "gamma,sigma,beta_sq_mean,lambda0,lambda1", rows)


def write_feasibility(path, points, skipped) -> None:
    """Grid feasibility map: ``gamma,sigma,feasible``."""
    def rows():
        for p in points:
            yield (_fmt(p.gamma), _fmt(p.sigma), "1")
        for gamma, sigma in skipped:
            yield (_fmt(gamma), _fmt(sigma), "0")
    _write_rows(path, "gamma,sigma,feasible", rows())


def write_matrix(path, tickers, matrix) -> None:
    """Square matrix as labelled delimited text, one row per ticker."""
    matrix = np.asarray(matrix, dtype=np.float64)
    def rows():
        for i, ticker in enumerate(tickers):
            yield (ticker, *(_fmt(v) for v in matrix[i]))
    _write_rows(path, ",".join(("ticker", *tickers)), rows())


def write_decomposition(outdir, decomposition: ModeDecomposition, eigenvalues,
                        source_hash: str) -> list[str]:
    """Write the three component matrices plus a small manifest.

    Returns the file names written inside ``outdir``.
    """
    outdir = Path(outdir)
    names = []
    for name in ("market", "group", "random"):
        filename = f"{name}_component.csv"
        write_matrix(outdir / filename, decomposition.tickers, getattr(decomposition, name))
        names.append(filename)
    manifest = {
        "n_group": decomposition.n_group,
        "n_assets": decomposition.n_assets,
        "eigenvalues": [float(v) for v in np.asarray(eigenvalues, dtype=np.float64)],
        "trace_split": [float(t) for t in decomposition.trace_split],
        "source_sha256": source_hash,
        "files": names,
    }
    write_manifest(outdir / "decomposition_manifest.json", manifest)
    return names + ["decomposition_manifest.json"]


def write_manifest(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
