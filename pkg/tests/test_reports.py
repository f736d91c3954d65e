"""File writers: exact headers, round-trip floats, byte-stable reruns."""

import hashlib
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from marketmodes.correlation import values_histogram
from marketmodes.filtering import component_histograms, decompose
from marketmodes.network import (
    cluster_scan,
    network_report,
    threshold_adjacency,
)
from marketmodes.prices import SectorMap
from marketmodes.reports import (
    sha256_file,
    write_cluster_report,
    write_cluster_scan,
    write_component_histograms,
    write_decomposition,
    write_edge_list,
    write_eigenvector_modes,
    write_feasibility,
    write_histogram,
    write_manifest,
    write_matrix,
    write_mp_density,
    write_spectrum,
    write_sweep,
)
from marketmodes.factor_model import SweepPoint
from marketmodes.spectrum import Spectrum, mp_bounds


def lines_of(path) -> list[str]:
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    return text.splitlines()


def tiny_spectrum() -> Spectrum:
    u0 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    u1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    u2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    vectors = np.column_stack([u0, u1, u2])
    return Spectrum(("B", "A", "C"), np.array([2.0, 0.7, 0.3]), vectors, n_obs=39)


def test_histogram_file_layout(tmp_path):
    hist = values_histogram([0.5, 0.5, 0.5, 0.5], bins=2, value_range=(0.0, 1.0))
    path = tmp_path / "hist.csv"
    write_histogram(path, hist)
    rows = lines_of(path)
    assert rows[0] == "bin_lo,bin_hi,count,density"
    assert rows[1] == "0.0,0.5,0,0.0"
    assert rows[2] == "0.5,1.0,4,2.0"


def test_component_histogram_file_layout(tmp_path, three_sector_pipeline):
    _, _, spectrum, _ = three_sector_pipeline
    hists = component_histograms(decompose(spectrum, 2), bins=4)
    path = tmp_path / "components.csv"
    write_component_histograms(path, hists)
    rows = lines_of(path)
    assert rows[0] == "component,bin_lo,bin_hi,count,density"
    assert len(rows) == 1 + 3 * 4
    assert [row.split(",")[0] for row in rows[1:]] == (
        ["market"] * 4 + ["group"] * 4 + ["random"] * 4
    )


def test_spectrum_file_layout(tmp_path):
    path = tmp_path / "spectrum.csv"
    write_spectrum(path, tiny_spectrum())
    rows = lines_of(path)
    assert rows[0] == "k,lambda,ipr"
    k, lam, ipr_value = rows[1].split(",")
    assert (k, lam) == ("0", "2.0")
    assert float(ipr_value) == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert len(rows) == 4


def test_spectrum_floats_round_trip(tmp_path):
    values = np.array([1.0 + np.pi / 10.0, 1.0, 1.0 - np.pi / 10.0])
    # orthonormal basis reused from the tiny spectrum
    vectors = tiny_spectrum().eigenvectors
    spectrum = Spectrum(("A", "B", "C"), values, vectors)
    path = tmp_path / "spectrum.csv"
    write_spectrum(path, spectrum)
    parsed = [float(row.split(",")[1]) for row in lines_of(path)[1:]]
    assert parsed == list(values)


def test_mp_density_curve_file(tmp_path):
    law = mp_bounds(6.0)
    path = tmp_path / "mp.csv"
    write_mp_density(path, law, n_points=64)
    rows = lines_of(path)
    assert rows[0] == "lambda,density"
    assert len(rows) == 65
    first_lambda, first_density = rows[1].split(",")
    last_lambda, last_density = rows[-1].split(",")
    assert float(first_lambda) == law.lambda_min
    assert float(last_lambda) == law.lambda_max
    # density vanishes at the support edges
    assert float(first_density) == 0.0
    assert float(last_density) == 0.0


def test_eigenvector_modes_file(tmp_path):
    spectrum = tiny_spectrum()
    sectors = SectorMap({"A": "FIN", "B": "TEC", "C": "FIN"})
    path = tmp_path / "modes.csv"
    write_eigenvector_modes(path, spectrum, sectors, modes=[0, 1])
    rows = lines_of(path)
    assert rows[0] == "mode,ticker,sector,component,abs_component"
    assert len(rows) == 7
    assert [row.split(",")[0] for row in rows[1:]] == ["0", "0", "0", "1", "1", "1"]
    # inside a mode, rows are sorted by sector then ticker
    assert [row.split(",")[1] for row in rows[1:4]] == ["A", "C", "B"]


def test_cluster_scan_file(tmp_path):
    group = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 1.0]])
    scan = cluster_scan(group, [0.1, 0.5])
    path = tmp_path / "scan.csv"
    write_cluster_scan(path, scan)
    rows = lines_of(path)
    assert rows[0] == "c_th,clusters,nodes,edges"
    assert rows[1] == "0.1,1,2,1"
    assert rows[2] == "0.5,0,0,0"


def test_edge_list_file(tmp_path):
    group = np.array([[1.0, 0.8, 0.0], [0.8, 1.0, 0.6], [0.0, 0.6, 1.0]])
    adjacency = threshold_adjacency(group, 0.5, tickers=("AA", "BB", "CC"))
    path = tmp_path / "edges.csv"
    write_edge_list(path, adjacency, group)
    rows = lines_of(path)
    assert rows[0] == "ticker_a,ticker_b,weight"
    assert rows[1] == "AA,BB,0.8"
    assert rows[2] == "BB,CC,0.6"
    assert len(rows) == 3


def test_cluster_report_file(tmp_path):
    group = np.array([[1.0, 0.8, 0.8], [0.8, 1.0, 0.8], [0.8, 0.8, 1.0]])
    adjacency = threshold_adjacency(group, 0.5, tickers=("N0", "N1", "N2"))
    sectors = SectorMap({"N0": "A", "N1": "A", "N2": "B"})
    clusters = network_report(adjacency, sectors)
    path = tmp_path / "clusters.csv"
    write_cluster_report(path, clusters)
    rows = lines_of(path)
    assert rows[0] == "cluster,size,edges,purity,dominant_sector,sector_counts,members"
    fields = rows[1].split(",")
    assert fields[0] == "0"
    assert fields[1] == "3"
    assert fields[2] == "3"
    assert float(fields[3]) == pytest.approx(2.0 / 3.0)
    assert fields[4] == "A"
    assert fields[5] == "A:2;B:1"
    assert fields[6] == "N0;N1;N2"


def test_sweep_file(tmp_path):
    points = (
        SweepPoint(gamma=0.3, sigma=0.2, beta_sq_mean=0.87, lambda0=8.0, lambda1=2.0),
        SweepPoint(gamma=0.5, sigma=0.2, beta_sq_mean=0.71, lambda0=7.0, lambda1=3.0),
    )
    path = tmp_path / "sweep.csv"
    write_sweep(path, points)
    rows = lines_of(path)
    assert rows[0] == "gamma,sigma,beta_sq_mean,lambda0,lambda1"
    assert rows[1] == "0.3,0.2,0.87,8.0,2.0"
    assert rows[2] == "0.5,0.2,0.71,7.0,3.0"


def test_feasibility_file(tmp_path):
    points = (SweepPoint(0.3, 0.2, 0.87, 8.0, 2.0),)
    path = tmp_path / "feasibility.csv"
    write_feasibility(path, points, skipped=((0.9, 0.9),))
    rows = lines_of(path)
    assert rows[0] == "gamma,sigma,feasible"
    assert rows[1] == "0.3,0.2,1"
    assert rows[2] == "0.9,0.9,0"


def test_matrix_file(tmp_path):
    path = tmp_path / "matrix.csv"
    write_matrix(path, ("AA", "BB"), np.array([[1.0, 0.5], [0.5, 1.0]]))
    rows = lines_of(path)
    assert rows[0] == "ticker,AA,BB"
    assert rows[1] == "AA,1.0,0.5"
    assert rows[2] == "BB,0.5,1.0"


def test_decomposition_bundle(tmp_path, three_sector_pipeline):
    _, _, spectrum, _ = three_sector_pipeline
    parts = decompose(spectrum, 2)
    written = write_decomposition(tmp_path, parts, spectrum.eigenvalues, "cafe" * 16)
    assert written == [
        "market_component.csv",
        "group_component.csv",
        "random_component.csv",
        "decomposition_manifest.json",
    ]
    for name in written:
        assert (tmp_path / name).exists()
    manifest = json.loads((tmp_path / "decomposition_manifest.json").read_text())
    assert manifest["n_group"] == 2
    assert manifest["n_assets"] == 60
    assert manifest["source_sha256"] == "cafe" * 16
    assert manifest["files"] == written[:3]
    assert_allclose(manifest["eigenvalues"], spectrum.eigenvalues, rtol=0.0, atol=0.0)
    assert_allclose(sum(manifest["trace_split"]), 60.0, rtol=0.0, atol=1e-8)


def test_manifest_is_sorted_and_newline_terminated(tmp_path):
    path = tmp_path / "manifest.json"
    write_manifest(path, {"zeta": 1, "alpha": {"b": 2, "a": 3}})
    text = path.read_text(encoding="utf-8")
    assert text == json.dumps(
        {"zeta": 1, "alpha": {"b": 2, "a": 3}}, indent=2, sort_keys=True
    ) + "\n"
    assert text.index("alpha") < text.index("zeta")


def test_writers_are_byte_stable(tmp_path):
    spectrum = tiny_spectrum()
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_spectrum(first, spectrum)
    write_spectrum(second, spectrum)
    assert first.read_bytes() == second.read_bytes()


def test_sha256_file_matches_hashlib(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"abc" * 1000)
    assert sha256_file(path) == hashlib.sha256(b"abc" * 1000).hexdigest()
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    assert sha256_file(empty) == hashlib.sha256(b"").hexdigest()
