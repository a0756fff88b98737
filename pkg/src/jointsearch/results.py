"""On-disk formats: benchmark, trace, oracle and report files.

Structured files are JSON with a ``provenance`` header carrying the tool
version, format name and version, seed, benchmark hash and config hash.
Flat tables are tab-separated with a header row. Non-finite floats are
written as ``null``.
"""

from __future__ import annotations

import csv
import json
import math
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .engine import OracleTable, ResourceUnit, RoundRecord, SearchTrace
from .errors import ParseError, ProvenanceError
from .simbench import FORMAT_VERSION, GroundTruth
from .space import SearchSpaceConfig, decode
from .tuner import BatchRecord

try:
    TOOL_VERSION = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    TOOL_VERSION = "0+unknown"


def provenance(kind: str, *, seed: int, benchmark_hash: str, config_hash: str | None) -> dict:
    return {"format": f"jointsearch-{kind}", "format_version": FORMAT_VERSION,
            "tool_version": TOOL_VERSION, "seed": seed,
            "benchmark_hash": benchmark_hash, "config_hash": config_hash}


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def _unfinite(x) -> float:
    return math.inf if x is None else float(x)


def dump_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(data, sort_keys=True, indent=1, allow_nan=False)
    path.write_text(text + "\n")


def load_json(path: str | Path, kind: str) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    prov = require(data, "provenance", path)
    fmt = require(prov, "format", path, "provenance")
    if fmt != f"jointsearch-{kind}":
        raise ParseError(f"{path}: field 'provenance.format': expected "
                         f"'jointsearch-{kind}', found {fmt!r}")
    if prov.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"{path}: field 'provenance.format_version': unsupported "
                         f"{prov.get('format_version')!r}")
    return data


def require(data: Any, name: str, path: Path, where: str = "") -> Any:
    label = f"{where}.{name}" if where else name
    if not isinstance(data, dict) or name not in data:
        raise ParseError(f"{path}: missing field '{label}'")
    return data[name]


def file_kind(path: str | Path) -> str:
    """Format kind named in a file's provenance header (``trace``, ``oracle``, ...)."""
    try:
        data = json.loads(Path(path).read_text())
        return data["provenance"]["format"].removeprefix("jointsearch-")
    except (OSError, json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"{path}: not a recognized result file ({exc})") from exc


def check_same_benchmark(*headers: dict) -> None:
    hashes = {h["benchmark_hash"] for h in headers}
    if len(hashes) != 1:
        raise ProvenanceError(f"files come from different benchmarks: {sorted(hashes)}")


# benchmark ---------------------------------------------------------------

def write_benchmark(path: Path, truth: GroundTruth, benchmark_hash: str) -> None:
    dump_json(path, {"provenance": provenance("benchmark", seed=truth.seed,
                                              benchmark_hash=benchmark_hash, config_hash=None),
                     "truth": truth.to_dict()})


def read_benchmark(path: str | Path) -> tuple[dict, GroundTruth]:
    data = load_json(path, "benchmark")
    try:
        truth = GroundTruth.from_dict(require(data, "truth", Path(path)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: field 'truth': {exc}") from exc
    return data["provenance"], truth


# trace -------------------------------------------------------------------

def trace_to_dict(trace: SearchTrace, truth: GroundTruth) -> dict:
    ids = np.asarray(trace.candidates)
    rounds = []
    for r in trace.rounds:
        arch_lat = r.key_best_latency[truth.arch_keys[ids]].sum(axis=1)
        rounds.append({
            "round": r.round_index,
            "resource_per_arch": r.resource,
            "survivors": r.survivors,
            "estimates": [[a, r.estimates[a][0], r.estimates[a][1]] for a in r.survivors],
            "estimated_front": r.estimated_front,
            "kept": r.kept,
            "eliminated": r.eliminated,
            "ledger": {"units": r.units, "epochs": r.epochs, "trials": r.trials},
            "candidate_latency_estimates": [_finite(x) for x in arch_lat],
            "subgraph_best_latency": [_finite(x) for x in r.key_best_latency],
            "tuning_batches": [[b.key_index, b.batch_size, b.improvement] for b in r.batches],
        })
    return {
        "mode": trace.mode, "nu": trace.nu, "budget": trace.budget,
        "unit": {"epochs_per_unit": trace.unit.epochs_per_unit,
                 "trials_per_unit": trace.unit.trials_per_unit},
        "noiseless": trace.noiseless, "candidates": trace.candidates,
        "rounds": rounds,
        "final_survivors": trace.final_survivors, "final_front": trace.final_front,
        "answer": trace.answer,
        "ledger": {"units": trace.total_units, "epochs": trace.total_epochs,
                   "trials": trace.total_trials},
    }


def write_trace(path: Path, trace: SearchTrace, truth: GroundTruth, *,
                benchmark_hash: str, config_hash: str) -> None:
    dump_json(path, {"provenance": provenance("trace", seed=trace.seed,
                                              benchmark_hash=benchmark_hash,
                                              config_hash=config_hash),
                     "trace": trace_to_dict(trace, truth)})


def read_trace(path: str | Path) -> tuple[dict, SearchTrace, list[np.ndarray]]:
    """Load a trace; also returns per-round latency estimates of every candidate."""
    path = Path(path)
    data = load_json(path, "trace")
    t = require(data, "trace", path)
    try:
        rounds = []
        cand_lat = []
        for i, r in enumerate(require(t, "rounds", path, "trace")):
            where = f"trace.rounds[{i}]"
            est = {int(a): (float(acc), float(lat))
                   for a, acc, lat in require(r, "estimates", path, where)}
            ledger = require(r, "ledger", path, where)
            rounds.append(RoundRecord(
                round_index=int(require(r, "round", path, where)),
                survivors=list(require(r, "survivors", path, where)),
                resource=int(require(r, "resource_per_arch", path, where)),
                units=int(require(ledger, "units", path, where + ".ledger")),
                epochs=int(require(ledger, "epochs", path, where + ".ledger")),
                trials=int(require(ledger, "trials", path, where + ".ledger")),
                estimates=est,
                estimated_front=list(require(r, "estimated_front", path, where)),
                kept=list(require(r, "kept", path, where)),
                eliminated=list(require(r, "eliminated", path, where)),
                key_best_latency=np.array([_unfinite(x) for x in
                                           require(r, "subgraph_best_latency", path, where)]),
                batches=[BatchRecord(int(k), int(s), float(g)) for k, s, g in
                         require(r, "tuning_batches", path, where)]))
            cand_lat.append(np.array([_unfinite(x) for x in
                                      require(r, "candidate_latency_estimates", path, where)]))
        unit = require(t, "unit", path, "trace")
        trace = SearchTrace(
            mode=require(t, "mode", path, "trace"), budget=int(require(t, "budget", path, "trace")),
            unit=ResourceUnit(**unit), seed=int(data["provenance"]["seed"]),
            noiseless=bool(require(t, "noiseless", path, "trace")),
            candidates=list(require(t, "candidates", path, "trace")), rounds=rounds,
            final_survivors=list(require(t, "final_survivors", path, "trace")),
            final_front=list(require(t, "final_front", path, "trace")),
            nu=t.get("nu"), answer=t.get("answer"))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed trace: {exc}") from exc
    return data["provenance"], trace, cand_lat


# oracle ------------------------------------------------------------------

def oracle_to_dict(table: OracleTable) -> dict:
    return {
        "epochs_full": table.epochs_full, "trials_full_per_key": table.trials_full_per_key,
        "ledger": {"units": table.ledger_units, "epochs": table.ledger_epochs,
                   "trials": table.ledger_trials},
        "front": table.front,
        "rows": [[a, float(acc), float(lat), int(f)] for a, acc, lat, f in
                 zip(table.arch_ids, table.accuracy, table.latency, table.flops)],
    }


def write_oracle(path: Path, table: OracleTable, *, seed: int, benchmark_hash: str,
                 config_hash: str) -> None:
    dump_json(path, {"provenance": provenance("oracle", seed=seed, benchmark_hash=benchmark_hash,
                                              config_hash=config_hash),
                     "oracle": oracle_to_dict(table)})


def read_oracle(path: str | Path) -> tuple[dict, OracleTable]:
    path = Path(path)
    data = load_json(path, "oracle")
    o = require(data, "oracle", path)
    try:
        rows = require(o, "rows", path, "oracle")
        ledger = require(o, "ledger", path, "oracle")
        for i, row in enumerate(rows):
            if len(row) != 4:
                raise ParseError(f"{path}: field 'oracle.rows[{i}]': expected 4 columns, "
                                 f"found {len(row)}")
        table = OracleTable(
            arch_ids=[int(r[0]) for r in rows],
            accuracy=np.array([float(r[1]) for r in rows]),
            latency=np.array([float(r[2]) for r in rows]),
            flops=np.array([int(r[3]) for r in rows], dtype=np.int64),
            front=list(require(o, "front", path, "oracle")),
            epochs_full=int(require(o, "epochs_full", path, "oracle")),
            trials_full_per_key=int(require(o, "trials_full_per_key", path, "oracle")),
            ledger_epochs=int(require(ledger, "epochs", path, "oracle.ledger")),
            ledger_trials=int(require(ledger, "trials", path, "oracle.ledger")),
            ledger_units=int(require(ledger, "units", path, "oracle.ledger")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: malformed oracle table: {exc}") from exc
    return data["provenance"], table


# flat tables -------------------------------------------------------------

def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


ARCH_COLUMNS = ["arch_id", "resolution", "width_multiplier", "expansion_ratio", "stage_depths"]


def arch_columns(arch_id: int, space: SearchSpaceConfig) -> list:
    a = decode(arch_id, space)
    return [a.arch_id, a.resolution, a.width_multiplier, a.expansion_ratio,
            "-".join(str(d) for d in a.stage_depths)]


def write_front_table(path: Path, arch_ids: Iterable[int], space: SearchSpaceConfig,
                      objectives: dict[int, tuple[float, float]]) -> None:
    rows = [arch_columns(a, space) + [objectives[a][0], objectives[a][1]]
            for a in sorted(arch_ids)]
    write_tsv(path, ARCH_COLUMNS + ["accuracy", "latency_ms"], rows)
