"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 latency threshold
infeasible, 4 provenance mismatch, 5 unreadable or malformed file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import results
from .config import RunConfig, load_config
from .engine import OracleTable, SearchTrace, run_brute_force, run_pareto, run_threshold
from .errors import ConfigError, ParseError, ProvenanceError, UsageError
from .metrics import (default_reference, gap_curve, hypervolume_2d, kendall_tau,
                      ledger_speedup, mean_accuracy_gap)
from .pareto import ObjectivePoint
from .simbench import GroundTruth, generate_ground_truth

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_PROVENANCE = 4
EXIT_PARSE = 5

log = logging.getLogger("jointsearch")


def _load_matching_benchmark(cfg: RunConfig, path: str) -> tuple[dict, GroundTruth]:
    header, truth = results.read_benchmark(path)
    if header["benchmark_hash"] != cfg.benchmark_hash():
        raise ProvenanceError(
            f"benchmark {path} has hash {header['benchmark_hash']}, "
            f"config expects {cfg.benchmark_hash()}; regenerate the benchmark")
    return header, truth


def cmd_generate_benchmark(cfg: RunConfig, out: Path | None = None) -> Path:
    path = out or cfg.output_dir / "benchmark.json"
    truth = generate_ground_truth(cfg.seed, cfg.space, cfg.profile)
    results.write_benchmark(path, truth, cfg.benchmark_hash())
    return path


def cmd_run(cfg: RunConfig, benchmark: str, out: Path | None = None) -> tuple[SearchTrace, Path]:
    _, truth = _load_matching_benchmark(cfg, benchmark)
    out = out or cfg.output_dir
    if cfg.mode == "threshold":
        trace = run_threshold(truth, cfg.effective_budget, cfg.nu, unit=cfg.unit, seed=cfg.seed,
                              noiseless=cfg.noiseless, beta=cfg.beta)
    else:
        trace = run_pareto(truth, cfg.effective_budget, unit=cfg.unit, seed=cfg.seed,
                           noiseless=cfg.noiseless, beta=cfg.beta)
    results.write_trace(out / "trace.json", trace, truth,
                        benchmark_hash=cfg.benchmark_hash(), config_hash=cfg.config_hash())
    last = trace.rounds[-1].estimates
    results.write_front_table(out / "front.tsv", trace.final_front, cfg.space, last)
    if cfg.mode == "threshold":
        chosen = [trace.answer] if trace.answer is not None else []
        results.write_front_table(out / "answer.tsv", chosen, cfg.space, last)
    return trace, out


def cmd_brute_force(cfg: RunConfig, benchmark: str, out: Path | None = None) -> tuple[OracleTable, Path]:
    _, truth = _load_matching_benchmark(cfg, benchmark)
    out = out or cfg.output_dir
    table = run_brute_force(truth, cfg.epochs_full, cfg.trials_full_per_key, cfg.unit,
                            noiseless=cfg.noiseless)
    results.write_oracle(out / "oracle.json", table, seed=cfg.seed,
                         benchmark_hash=cfg.benchmark_hash(), config_hash=cfg.config_hash())
    front = set(table.front)
    rows = [results.arch_columns(a, cfg.space) + [float(acc), float(lat), int(f), int(a in front)]
            for a, acc, lat, f in zip(table.arch_ids, table.accuracy, table.latency, table.flops)]
    results.write_tsv(out / "oracle.tsv",
                      results.ARCH_COLUMNS + ["accuracy", "latency_ms", "flops", "on_front"], rows)
    return table, out


def cmd_report(result: str, oracle: str, out: Path | None = None) -> dict:
    """Compare a trace (or an oracle table, for a self-check) against the oracle."""
    o_header, table = results.read_oracle(oracle)
    kind = results.file_kind(result)
    if kind == "trace":
        r_header, trace, cand_lat = results.read_trace(result)
    elif kind == "oracle":
        r_header, other = results.read_oracle(result)
        trace, cand_lat = None, None
    else:
        raise ParseError(f"{result}: expected a trace or oracle file, found {kind!r}")
    results.check_same_benchmark(o_header, r_header)
    out = out or Path(result).parent / "report"

    acc = dict(zip(table.arch_ids, table.accuracy.tolist()))
    lat = dict(zip(table.arch_ids, table.latency.tolist()))
    if trace is not None:
        missing = set(trace.candidates) - acc.keys()
        if missing:
            raise ProvenanceError(f"oracle table lacks {len(missing)} traced architectures")
        ids = trace.candidates
        search_front = trace.final_front
        curve = [(g.round_index, g.ledger_units, g.mean_gap) for g in gap_curve(trace, table)]
        search_units = trace.total_units
        estimators = {f"search@round{r.round_index}(units={u})": est
                      for r, est, u in zip(trace.rounds, cand_lat,
                                           np.cumsum([r.units for r in trace.rounds]))}
    else:
        ids = other.arch_ids
        search_front = other.front
        gap = 100.0 * mean_accuracy_gap(table.front, other.front, acc, lat)
        curve = [(0, other.ledger_units, gap)]
        search_units = other.ledger_units
        estimators = {"oracle": other.latency}

    true_pts = [ObjectivePoint(a, acc[a], lat[a]) for a in ids]
    ref = default_reference(true_pts)
    oracle_front = [p for p in true_pts if p.arch_id in set(table.front)]
    hv_oracle = hypervolume_2d(oracle_front, ref)
    hv_search = hypervolume_2d([ObjectivePoint(a, acc[a], lat[a]) for a in search_front], ref)

    true_lat = [lat[a] for a in ids]
    flop_of = dict(zip(table.arch_ids, table.flops.tolist()))
    taus = {"flops": kendall_tau([flop_of[a] for a in ids], true_lat)}
    taus.update({name: kendall_tau(est, true_lat) for name, est in estimators.items()})
    taus["true_latency"] = kendall_tau(true_lat, true_lat)

    speedup = ledger_speedup(table.ledger_units, search_units)
    results.write_tsv(out / "hypervolume.tsv", ["front", "members", "hypervolume"],
                      [["oracle", len(oracle_front), hv_oracle],
                       ["search", len(search_front), hv_search]])
    results.write_tsv(out / "rank_table.tsv", ["estimator", "kendall_tau_b"], taus.items())
    results.write_tsv(out / "gap_curve.tsv", ["round", "ledger_units", "mean_gap_pp"], curve)
    summary = {
        "provenance": results.provenance("report", seed=r_header["seed"],
                                         benchmark_hash=r_header["benchmark_hash"],
                                         config_hash=r_header["config_hash"]),
        "hypervolume": {"oracle": hv_oracle, "search": hv_search,
                        "ratio": hv_search / hv_oracle if hv_oracle else None,
                        "reference": {"accuracy": ref.accuracy, "latency": ref.latency}},
        "kendall_tau": taus,
        "gap_curve": [{"round": r, "ledger_units": int(u), "mean_gap_pp": g} for r, u, g in curve],
        "final_mean_gap_pp": curve[-1][2],
        "ledger": {"oracle_units": table.ledger_units, "search_units": search_units,
                   "speedup": speedup},
    }
    results.dump_json(out / "summary.json", summary)
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointsearch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-benchmark", help="write simulated ground truth")
    p.add_argument("--config", required=True)
    p.add_argument("--out", type=Path, help="benchmark file (default: <output_dir>/benchmark.json)")

    for name, help_text in (("run", "run the multi-fidelity search"),
                            ("brute-force", "fully evaluate every architecture")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--benchmark", required=True)
        p.add_argument("--out", type=Path, help="output directory (default: config output_dir)")

    p = sub.add_parser("report", help="compare a search trace with the oracle table")
    p.add_argument("--result", required=True, help="trace.json (or oracle.json for a self-check)")
    p.add_argument("--oracle", required=True)
    p.add_argument("--out", type=Path, help="report directory (default: <result dir>/report)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "generate-benchmark":
            path = cmd_generate_benchmark(load_config(args.config), args.out)
            log.info("wrote %s", path)
        elif args.command == "run":
            cfg = load_config(args.config)
            trace, out = cmd_run(cfg, args.benchmark, args.out)
            log.info("%d rounds, %d final survivors, %d units; wrote %s",
                     len(trace.rounds), len(trace.final_survivors), trace.total_units, out)
            if cfg.mode == "threshold" and not trace.feasible:
                log.error("no surviving architecture meets the latency threshold %g ms", cfg.nu)
                return EXIT_INFEASIBLE
        elif args.command == "brute-force":
            table, out = cmd_brute_force(load_config(args.config), args.benchmark, args.out)
            log.info("%d architectures, front of %d, %d units; wrote %s",
                     len(table.arch_ids), len(table.front), table.ledger_units, out)
        elif args.command == "report":
            summary = cmd_report(args.result, args.oracle, args.out)
            log.info("hypervolume ratio %.4f, final gap %.3f pp, ledger speedup %.1fx",
                     summary["hypervolume"]["ratio"], summary["final_mean_gap_pp"],
                     summary["ledger"]["speedup"])
    except (ConfigError, UsageError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ProvenanceError as exc:
        log.error("%s", exc)
        return EXIT_PROVENANCE
    except ParseError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
