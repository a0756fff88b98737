"""Front-quality and ranking metrics: hypervolume, Kendall tau-b, accuracy gap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import UsageError
from .pareto import ObjectivePoint, pareto_front


@dataclass(frozen=True)
class GapCurvePoint:
    round_index: int
    ledger_units: int
    mean_gap: float  # percentage points


def default_reference(points: Iterable[ObjectivePoint], factor: float = 1.1) -> ObjectivePoint:
    """Zero accuracy and ``factor`` times the largest latency."""
    lat = max(p.latency for p in points)
    return ObjectivePoint(-1, 0.0, factor * lat)


def hypervolume_2d(points: Iterable[ObjectivePoint], reference: ObjectivePoint) -> float:
    """Area dominated by ``points`` and bounded by ``reference``.

    Points slower than the reference or less accurate than it add nothing.
    """
    if not (math.isfinite(reference.accuracy) and math.isfinite(reference.latency)):
        raise UsageError("reference point must be finite")
    pts = sorted(((p.latency, -p.accuracy) for p in points
                  if p.latency <= reference.latency and p.accuracy >= reference.accuracy))
    best = reference.accuracy
    # sweep by latency; each staircase step spans to the next improving point
    steps = []
    for lat, neg_acc in pts:
        acc = -neg_acc
        if acc > best:
            steps.append((lat, acc))
            best = acc
    area = 0.0
    for i, (lat, acc) in enumerate(steps):
        right = steps[i + 1][0] if i + 1 < len(steps) else reference.latency
        area += (right - lat) * (acc - reference.accuracy)
    return area


def kendall_tau(rank_a: Sequence[float], rank_b: Sequence[float]) -> float:
    """Tie-corrected Kendall tau-b between two paired score lists."""
    a = np.asarray(rank_a, dtype=float)
    b = np.asarray(rank_b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise UsageError("rankings must be 1-D and of equal length")
    n = len(a)
    if n < 2:
        raise UsageError("need at least two paired observations")
    i, j = np.triu_indices(n, k=1)
    sa = np.sign(a[i] - a[j]).astype(np.int64)
    sb = np.sign(b[i] - b[j]).astype(np.int64)
    s = int((sa * sb).sum())
    n0 = len(i)
    ties_a = int((sa == 0).sum())
    ties_b = int((sb == 0).sum())
    denom = (n0 - ties_a) * (n0 - ties_b)
    if denom == 0:
        return math.nan
    return s / math.sqrt(denom)


def mean_accuracy_gap(front: Sequence[int], found: Iterable[int],
                      accuracy: Mapping[int, float], latency: Mapping[int, float]) -> float:
    """Mean over ``front`` of the accuracy shortfall of the best found model
    no slower than each front member, floored at zero (fractions, not pp)."""
    found = list(found)
    f_acc = np.array([accuracy[a] for a in found])
    f_lat = np.array([latency[a] for a in found])
    gaps = []
    for p in sorted(set(front)):
        ok = f_acc[f_lat <= latency[p]]
        # nothing found that fast: the whole accuracy counts as missing
        best = ok.max() if ok.size else 0.0
        gaps.append(max(0.0, accuracy[p] - best))
    return float(np.mean(gaps))


def gap_curve(trace, oracle) -> list[GapCurvePoint]:
    """Accuracy gap to the oracle front after each round, in percentage points.

    The models counted as found by a given round are the union of the
    estimated fronts reported at every round so far; both sides of the gap
    use oracle objectives.
    """
    if not trace.rounds:
        raise UsageError("trace has no rounds")
    acc = {a: float(x) for a, x in zip(oracle.arch_ids, oracle.accuracy)}
    lat = {a: float(x) for a, x in zip(oracle.arch_ids, oracle.latency)}
    missing = set(trace.candidates) - acc.keys()
    if missing:
        raise UsageError(f"oracle table lacks {len(missing)} traced architectures")
    candidates = set(trace.candidates)
    front = [a for a in oracle.front if a in candidates]
    if len(candidates) < len(oracle.arch_ids):
        front = sorted(pareto_front(ObjectivePoint(a, acc[a], lat[a]) for a in candidates))
    found: set[int] = set()
    ledger = 0
    curve = []
    for r in trace.rounds:
        found |= set(r.estimated_front)
        ledger += r.units
        curve.append(GapCurvePoint(r.round_index, ledger,
                                   100.0 * mean_accuracy_gap(front, found, acc, lat)))
    return curve


def latency_estimates(truth, key_best_latency: np.ndarray,
                      arch_ids: Sequence[int] | None = None) -> np.ndarray:
    """Sum-of-best-subgraph latency estimate per architecture from a snapshot."""
    ids = np.arange(truth.n) if arch_ids is None else np.asarray(arch_ids)
    return np.asarray(key_best_latency)[truth.arch_keys[ids]].sum(axis=1)


def rank_table(true_latency: Sequence[float],
               estimators: Mapping[str, Sequence[float]]) -> dict[str, float]:
    """Kendall tau-b of each estimator against true latency."""
    return {name: kendall_tau(scores, true_latency) for name, scores in estimators.items()}


def ledger_speedup(oracle_units: int, search_units: int) -> float:
    if search_units <= 0:
        raise UsageError("search ledger is empty")
    return oracle_units / search_units
