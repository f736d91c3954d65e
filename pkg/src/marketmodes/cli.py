"""Command line interface.

Four subcommands cover the pipeline:

* ``analyze``: full spectral analysis of a price file, from ingestion to
  the threshold network, written as a bundle of delimited files plus a
  JSON manifest.
* ``simulate``: two-factor market simulation followed by the same
  analysis, plus an analytic-versus-measured comparison table.
* ``sweep``: spectrum extremes over a (gamma, sigma) grid.
* ``surrogate``: shuffled-returns noise baseline for a price file.

Exit codes: 0 success, 2 validation error (bad arguments or matrices),
3 data error (unusable price or sector records), 4 infeasible simulation
configuration. Runs with fixed seeds write byte-identical files.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import correlation_matrix, element_histogram, offdiag_mean
from .errors import DataError, FeasibilityError, MarketModesError, ValidationError
from .factor_model import (
    analytic_extremes,
    analytic_spectrum_no_market,
    population_matrix,
    sample_params,
    sector_label,
    simulate_returns,
    sweep,
)
from .filtering import auto_n_group, component_histograms, decompose
from .network import (
    cluster_scan,
    default_thresholds,
    network_report,
    select_threshold,
    threshold_adjacency,
)
from .prices import (
    SectorMap,
    forward_fill,
    read_price_file,
    read_sector_file,
    slice_period,
)
from .returns import ReturnMatrix, log_returns, normalize
from .reports import (
    sha256_file,
    write_cluster_report,
    write_cluster_scan,
    write_component_histograms,
    write_decomposition,
    write_edge_list,
    write_eigenvector_modes,
    write_histogram,
    write_manifest,
    write_mp_density,
    write_spectrum,
    write_sweep,
    write_feasibility,
)
from .spectrum import deviating_eigenvalues, eigendecompose, mp_bounds, shuffle_surrogate

logger = logging.getLogger("marketmodes")

N_REPORT_MODES = 4

# Updated as the pipeline advances so error diagnostics can name the stage.
_STAGE = ["startup"]


def _set_stage(name: str) -> None:
    _STAGE[0] = name
    logger.info("stage: %s", name)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_period(text: str) -> tuple[str, str]:
    parts = text.split(":")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise argparse.ArgumentTypeError(f"expected START:END, got {text!r}")
    return (parts[0], parts[1])


def _parse_thresholds(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:N, got {text!r}") from None
    if not lo <= hi or n < 1:
        raise argparse.ArgumentTypeError(f"need LO <= HI and N >= 1, got {text!r}")
    return (lo, hi, n)


def _parse_grid(text: str) -> list[float]:
    lo, hi, n = _parse_thresholds(text)
    return [float(x) for x in np.linspace(lo, hi, n)]


def _parse_ng(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"ng must be >= 0, got {value}")
    return value


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        if "x" in text:
            k, n = text.split("x")
            sizes = (int(n),) * int(k)
        else:
            sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected KxN or a comma list of sizes, got {text!r}"
        ) from None
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"sector sizes must be positive, got {text!r}")
    return sizes


def _add_analysis_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ng", type=_parse_ng, default="auto",
                        help="group-mode count, or 'auto' from the deviating eigenvalues")
    parser.add_argument("--margin", type=float, default=0.0,
                        help="relative widening of the deviation cutoff")
    parser.add_argument("--thresholds", type=_parse_thresholds, default=None,
                        metavar="LO:HI:N", help="network scan grid; default spans the "
                        "group matrix off-diagonal range with 200 points")
    parser.add_argument("--count-singletons", action="store_true",
                        help="count isolated nodes as clusters in the scan")
    parser.add_argument("--bins", type=int, default=50, help="histogram bins on [-1, 1]")
    parser.add_argument("--export-matrices", action="store_true",
                        help="also write the market/group/random matrices")


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prices", required=True, help="delimited date,ticker,close file")
    parser.add_argument("--sectors", default=None, help="delimited ticker,sector file")
    parser.add_argument("--delimiter", default=",", help="field delimiter of input files")
    parser.add_argument("--dt", type=int, default=1, help="return horizon in days")
    parser.add_argument("--period", type=_parse_period, default=None,
                        metavar="START:END", help="closed date window to analyze")
    parser.add_argument("--drop-degenerate", action="store_true",
                        help="drop constant-return tickers instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketmodes",
        description="Spectral analysis of stock return cross-correlations.",
    )
    parser.add_argument("--version", action="version", version=f"marketmodes {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="full analysis of a price file")
    _add_input_flags(analyze)
    _add_analysis_flags(analyze)
    analyze.add_argument("--seed", type=int, default=0, help="surrogate shuffle seed")
    analyze.add_argument("--out", required=True, help="output directory")

    simulate = commands.add_parser("simulate", help="simulate a two-factor market and analyze it")
    simulate.add_argument("--sizes", type=_parse_sizes, default=(20,) * 10,
                          metavar="KxN|N1,N2,...", help="sector sizes (default 10x20)")
    simulate.add_argument("--gamma", type=float, default=0.3, help="mean sector strength")
    simulate.add_argument("--sigma", type=float, default=0.6, help="mean idiosyncratic strength")
    simulate.add_argument("--width", type=float, default=0.05, help="uniform draw width")
    simulate.add_argument("--t-len", type=int, default=2000, help="simulated observations")
    _add_analysis_flags(simulate)
    simulate.add_argument("--seed", type=int, default=0, help="master seed")
    simulate.add_argument("--out", required=True, help="output directory")

    grid = commands.add_parser("sweep", help="spectrum extremes over a (gamma, sigma) grid")
    grid.add_argument("--sizes", type=_parse_sizes, default=(20,) * 10,
                      metavar="KxN|N1,N2,...", help="sector sizes (default 10x20)")
    grid.add_argument("--gamma-grid", type=_parse_grid, required=True, metavar="LO:HI:N")
    grid.add_argument("--sigma-grid", type=_parse_grid, required=True, metavar="LO:HI:N")
    grid.add_argument("--width", type=float, default=0.05, help="uniform draw width")
    grid.add_argument("--t-len", type=int, default=2000, help="simulated observations")
    grid.add_argument("--seed", type=int, default=0, help="master seed")
    grid.add_argument("--out", required=True, help="output directory")

    surrogate = commands.add_parser("surrogate", help="shuffled-returns noise baseline")
    _add_input_flags(surrogate)
    surrogate.add_argument("--seed", type=int, default=0, help="shuffle seed")
    surrogate.add_argument("--out", required=True, help="output directory")

    return parser


# ---------------------------------------------------------------------------
# shared pipeline pieces
# ---------------------------------------------------------------------------


def _load_panel(args) -> tuple:
    """Read, fill and slice the price table; returns (table, sectors)."""
    _set_stage("ingest")
    table = forward_fill(read_price_file(args.prices, delimiter=args.delimiter))
    if args.period is not None:
        table = slice_period(table, args.period[0], args.period[1])
    if args.sectors is not None:
        sectors = read_sector_file(args.sectors, delimiter=args.delimiter)
        sectors.require_cover(table.tickers)
    else:
        sectors = SectorMap.uniform(table.tickers)
    return table, sectors


def _drop_degenerate(returns: ReturnMatrix, enabled: bool) -> tuple[ReturnMatrix, list[str]]:
    """Remove constant-return rows when asked; otherwise leave them to fail."""
    if not enabled:
        return returns, []
    centered = returns.values - returns.values.mean(axis=1, keepdims=True)
    degenerate = np.mean(centered * centered, axis=1) <= 0.0
    if not degenerate.any():
        return returns, []
    dropped = [t for t, bad in zip(returns.tickers, degenerate) if bad]
    for ticker in dropped:
        logger.warning("dropping %s: constant return series", ticker)
    keep = ~degenerate
    kept = tuple(t for t, ok in zip(returns.tickers, keep) if ok)
    if len(kept) < 2:
        raise DataError("fewer than 2 tickers left after dropping degenerate series")
    return ReturnMatrix(kept, returns.values[keep], returns.dt), dropped


def _analysis_bundle(args, returns: ReturnMatrix, sectors: SectorMap,
                     surrogate_seed: int, outdir: Path, source_hash: str):
    """Run returns -> spectrum -> modes -> network and write the bundle.

    Returns the results block for the manifest, the list of files written,
    and the fitted spectrum (reused by the simulate comparison table).
    """
    files: list[str] = []

    _set_stage("correlation")
    normalized = normalize(returns)
    corr = correlation_matrix(normalized)
    write_histogram(outdir / "element_histogram.csv", element_histogram(corr, args.bins))
    files.append("element_histogram.csv")

    _set_stage("spectrum")
    spec = eigendecompose(corr)
    law = mp_bounds(spec.q)
    write_spectrum(outdir / "spectrum.csv", spec)
    write_mp_density(outdir / "mp_density.csv", law)
    files += ["spectrum.csv", "mp_density.csv"]

    _set_stage("surrogate")
    surrogate_spec = eigendecompose(shuffle_surrogate(normalized, surrogate_seed))
    write_spectrum(outdir / "surrogate_spectrum.csv", surrogate_spec)
    files.append("surrogate_spectrum.csv")
    inside = np.mean(
        (surrogate_spec.eigenvalues >= law.lambda_min)
        & (surrogate_spec.eigenvalues <= law.lambda_max)
    )

    _set_stage("decomposition")
    n_group = args.ng if args.ng != "auto" else auto_n_group(spec, law, args.margin)
    parts = decompose(spec, n_group)
    write_component_histograms(
        outdir / "component_histograms.csv", component_histograms(parts, args.bins)
    )
    files.append("component_histograms.csv")

    modes = range(min(N_REPORT_MODES, spec.n_assets))
    write_eigenvector_modes(outdir / "eigenvectors_top4.csv", spec, sectors, modes)
    files.append("eigenvectors_top4.csv")

    _set_stage("network")
    if args.thresholds is not None:
        lo, hi, n_cuts = args.thresholds
        grid = np.linspace(lo, hi, n_cuts)
    else:
        grid = default_thresholds(parts.group)
    scan = cluster_scan(parts.group, grid, count_singletons=args.count_singletons,
                        tickers=parts.tickers)
    write_cluster_scan(outdir / "cluster_scan.csv", scan)
    files.append("cluster_scan.csv")

    c_star = select_threshold(scan)
    network = threshold_adjacency(parts.group, c_star, tickers=parts.tickers)
    write_edge_list(outdir / "edge_list.csv", network, parts.group)
    clusters = network_report(network, sectors, count_singletons=args.count_singletons)
    write_cluster_report(outdir / "cluster_report.csv", clusters)
    files += ["edge_list.csv", "cluster_report.csv"]

    if args.export_matrices:
        files += write_decomposition(outdir, parts, spec.eigenvalues, source_hash)

    results = {
        "offdiag_mean": offdiag_mean(corr),
        "q": float(spec.q),
        "mp_lambda_min": law.lambda_min,
        "mp_lambda_max": law.lambda_max,
        "lambda0": float(spec.eigenvalues[0]),
        "n_deviating": len(deviating_eigenvalues(spec, law, args.margin)),
        "n_group": int(n_group),
        "surrogate_lambda0": float(surrogate_spec.eigenvalues[0]),
        "surrogate_within_mp_fraction": float(inside),
        "c_star": c_star,
        "n_clusters": len([c for c in clusters if c.size >= 2]),
        "n_nodes": int(network.edges.any(axis=1).sum()),
        "n_edges": network.n_edges,
    }
    return results, files, spec


def _common_parameters(args) -> dict:
    thresholds = None
    if args.thresholds is not None:
        thresholds = {"lo": args.thresholds[0], "hi": args.thresholds[1],
                      "n": args.thresholds[2]}
    return {
        "ng": args.ng,
        "margin": args.margin,
        "bins": args.bins,
        "thresholds": thresholds,
        "count_singletons": args.count_singletons,
        "seed": args.seed,
    }


def _finish(outdir: Path, manifest: dict, files: list[str]) -> int:
    manifest["outputs"] = sorted(files)
    write_manifest(outdir / "manifest.json", manifest)
    print(f"wrote {len(files)} files and manifest.json to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    table, sectors = _load_panel(args)
    _set_stage("returns")
    returns, dropped = _drop_degenerate(log_returns(table, args.dt), args.drop_degenerate)

    prices_hash = sha256_file(args.prices)
    results, files, _ = _analysis_bundle(args, returns, sectors, args.seed, outdir, prices_hash)
    manifest = {
        "command": "analyze",
        "version": __version__,
        "parameters": {
            **_common_parameters(args),
            "dt": args.dt,
            "period": list(args.period) if args.period else None,
            "delimiter": args.delimiter,
            "drop_degenerate": args.drop_degenerate,
        },
        "inputs": {
            "prices": str(args.prices),
            "prices_sha256": prices_hash,
            "sectors": str(args.sectors) if args.sectors else None,
            "sectors_sha256": sha256_file(args.sectors) if args.sectors else None,
        },
        "panel": {
            "n_stocks": len(returns.tickers),
            "n_dates": table.n_dates,
            "n_returns": returns.n_returns,
            "first_date": table.dates[0],
            "last_date": table.dates[-1],
            "dropped_tickers": dropped,
        },
        "results": results,
    }
    return _finish(outdir, manifest, files)


def cmd_simulate(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _set_stage("simulate")
    param_seed, sim_seed, surrogate_seed = (
        int(x) for x in np.random.SeedSequence(args.seed).generate_state(3)
    )
    params = sample_params(args.sizes, args.gamma, args.sigma, args.width, param_seed)
    returns = simulate_returns(params, args.t_len, sim_seed)
    labels = [sector_label(k) for k in range(params.n_sectors)]
    sectors = SectorMap({
        ticker: labels[params.sector_index[i]] for i, ticker in enumerate(returns.tickers)
    })

    results, files, spec = _analysis_bundle(args, returns, sectors, surrogate_seed,
                                            outdir, f"seed:{args.seed}")
    _set_stage("comparison")
    files.append(_write_analytic_comparison(outdir, params, spec.eigenvalues))

    manifest = {
        "command": "simulate",
        "version": __version__,
        "parameters": {
            **_common_parameters(args),
            "sizes": list(args.sizes),
            "gamma": args.gamma,
            "sigma": args.sigma,
            "width": args.width,
            "t_len": args.t_len,
        },
        "model": {
            "beta_sq_mean": float(np.mean(params.beta**2)),
            "gamma_sq_mean": float(np.mean(params.gamma**2)),
            "sigma_sq_mean": float(np.mean(params.sigma_idio**2)),
            "n_stocks": params.n_stocks,
            "n_sectors": params.n_sectors,
        },
        "results": results,
    }
    return _finish(outdir, manifest, files)


def _write_analytic_comparison(outdir: Path, params, measured: np.ndarray) -> str:
    """Compare closed-form and population eigenvalues with the sample ones.

    One row per prediction. The closed-form rows use the uniform-strength
    formulas at the mean strengths; the population rows cover all K large
    eigenvalues of the exact expected correlation matrix.
    """
    k = params.n_sectors
    beta_bar = float(np.sqrt(np.mean(params.beta**2)))
    gamma_bar = float(np.sqrt(np.mean(params.gamma**2)))

    if beta_bar > 0.0:
        pred0, pred1, bulk = analytic_extremes(beta_bar, gamma_bar, params.sizes)
    else:
        closed = analytic_spectrum_no_market(params.sizes, [gamma_bar] * k).eigenvalues()
        pred0, pred1, bulk = closed[0], closed[1], float(np.median(closed[k:]))
    pop_values = np.linalg.eigvalsh(population_matrix(params))[::-1]

    rows = [
        ("lambda0_closed_form", pred0, float(measured[0])),
        ("lambda1_closed_form", pred1, float(measured[1])),
    ]
    if k < params.n_stocks:
        rows.append(("bulk_closed_form", bulk, float(np.median(measured[k:]))))
    rows += [
        (f"lambda{j}_population", float(pop_values[j]), float(measured[j]))
        for j in range(k)
    ]
    path = outdir / "analytic_comparison.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("quantity,predicted,measured\n")
        for name, predicted, observed in rows:
            handle.write(f"{name},{predicted!r},{observed!r}\n")
    return "analytic_comparison.csv"


def cmd_sweep(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _set_stage("sweep")
    result = sweep(args.sizes, args.gamma_grid, args.sigma_grid,
                   args.width, args.t_len, args.seed)
    write_sweep(outdir / "sweep.csv", result.points)
    write_feasibility(outdir / "feasibility.csv", result.points, result.skipped)
    manifest = {
        "command": "sweep",
        "version": __version__,
        "parameters": {
            "sizes": list(args.sizes),
            "gamma_grid": args.gamma_grid,
            "sigma_grid": args.sigma_grid,
            "width": args.width,
            "t_len": args.t_len,
            "seed": args.seed,
        },
        "results": {
            "n_points": len(result.points),
            "n_skipped": len(result.skipped),
            "lambda0_max": max(p.lambda0 for p in result.points),
            "lambda1_max": max(p.lambda1 for p in result.points),
        },
    }
    return _finish(outdir, manifest, ["sweep.csv", "feasibility.csv"])


def cmd_surrogate(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    table, _ = _load_panel(args)
    _set_stage("returns")
    returns, dropped = _drop_degenerate(log_returns(table, args.dt), args.drop_degenerate)
    normalized = normalize(returns)

    _set_stage("surrogate")
    surrogate_spec = eigendecompose(shuffle_surrogate(normalized, args.seed))
    law = mp_bounds(surrogate_spec.q)
    write_spectrum(outdir / "surrogate_spectrum.csv", surrogate_spec)
    write_mp_density(outdir / "mp_density.csv", law)
    inside = np.mean(
        (surrogate_spec.eigenvalues >= law.lambda_min)
        & (surrogate_spec.eigenvalues <= law.lambda_max)
    )
    manifest = {
        "command": "surrogate",
        "version": __version__,
        "parameters": {
            "dt": args.dt,
            "period": list(args.period) if args.period else None,
            "seed": args.seed,
            "delimiter": args.delimiter,
            "drop_degenerate": args.drop_degenerate,
        },
        "inputs": {
            "prices": str(args.prices),
            "prices_sha256": sha256_file(args.prices),
        },
        "panel": {
            "n_stocks": len(returns.tickers),
            "n_returns": returns.n_returns,
            "dropped_tickers": dropped,
        },
        "results": {
            "q": float(surrogate_spec.q),
            "mp_lambda_min": law.lambda_min,
            "mp_lambda_max": law.lambda_max,
            "surrogate_lambda0": float(surrogate_spec.eigenvalues[0]),
            "surrogate_within_mp_fraction": float(inside),
        },
    }
    return _finish(outdir, manifest, ["surrogate_spectrum.csv", "mp_density.csv"])


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "surrogate": cmd_surrogate,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    prefix = f"marketmodes {args.command} [{{stage}}]"
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as err:
        print(f"{prefix.format(stage=_STAGE[0])}: validation error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"{prefix.format(stage=_STAGE[0])}: data error: {err}", file=sys.stderr)
        return 3
    except FeasibilityError as err:
        print(f"{prefix.format(stage=_STAGE[0])}: infeasible configuration: {err}",
              file=sys.stderr)
        return 4
    except MarketModesError as err:
        print(f"{prefix.format(stage=_STAGE[0])}: internal error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
