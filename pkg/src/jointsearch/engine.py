"""Interleaved multi-objective successive halving and the brute-force oracle.

Every round ``k`` gives each surviving architecture ``r_k`` resource units,
``r_k = B // (|S_k| * ceil(log2 n))``. One unit is ``epochs_per_unit``
training epochs for the architecture plus ``trials_per_unit`` tuning trials
added to a pool shared by all unique subgraphs of the survivors. Survivors
are then chosen from best-so-far estimates by Pareto halving or by the
latency-threshold rule.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import rng
from .errors import ConfigError, UsageError
from .pareto import ObjectivePoint, pareto_front, select_pareto_halving, select_threshold
from .simbench import FidelityRecord, GroundTruth, Simulator, estimated_latency
from .tuner import BatchRecord, SchedulerConfig, initial_states, run_tuning_round

log = logging.getLogger(__name__)

DEFAULT_EPOCHS_FULL = 750  # 50 * max curve rate
DEFAULT_TRIALS_FULL = 4096


@dataclass(frozen=True)
class ResourceUnit:
    epochs_per_unit: int = 1
    trials_per_unit: int = 64

    def __post_init__(self):
        if self.epochs_per_unit < 1 or self.trials_per_unit < 1:
            raise ConfigError("epochs_per_unit and trials_per_unit must be >= 1")


@dataclass(frozen=True)
class ThresholdConfig:
    nu: float

    def __post_init__(self):
        if not (self.nu > 0):
            raise ConfigError(f"latency threshold must be positive, got {self.nu}")


def num_rounds(n: int) -> int:
    """ceil(log2 n), computed exactly on integers."""
    if n < 1:
        raise UsageError("n must be >= 1")
    return (n - 1).bit_length()


def resource_per_arch(budget: int, survivors: int, n: int) -> int:
    return budget // (survivors * num_rounds(n))


@dataclass
class RoundRecord:
    round_index: int
    survivors: list[int]
    resource: int
    units: int
    epochs: int
    trials: int
    estimates: dict[int, tuple[float, float]]
    estimated_front: list[int]
    kept: list[int]
    eliminated: list[int]
    key_best_latency: np.ndarray
    batches: list[BatchRecord] = field(repr=False)


@dataclass
class SearchTrace:
    mode: str
    budget: int
    unit: ResourceUnit
    seed: int
    noiseless: bool
    candidates: list[int]
    rounds: list[RoundRecord]
    final_survivors: list[int]
    final_front: list[int]
    nu: float | None = None
    answer: int | None = None

    @property
    def total_units(self) -> int:
        return sum(r.units for r in self.rounds)

    @property
    def total_epochs(self) -> int:
        return sum(r.epochs for r in self.rounds)

    @property
    def total_trials(self) -> int:
        return sum(r.trials for r in self.rounds)

    @property
    def feasible(self) -> bool:
        return self.answer is not None


def _candidates(truth: GroundTruth, candidates: Iterable[int] | None) -> list[int]:
    ids = sorted(set(range(truth.n) if candidates is None else candidates))
    if len(ids) < 2:
        raise ConfigError("at least two candidate architectures are required")
    if ids[0] < 0 or ids[-1] >= truth.n:
        raise ConfigError("candidate arch_id outside the search space")
    return ids


def _search(truth: GroundTruth, budget: int, unit: ResourceUnit, seed: int,
            noiseless: bool, candidates: Iterable[int] | None, beta: int,
            select: Callable[[list[ObjectivePoint]], set[int]], mode: str,
            nu: float | None) -> SearchTrace:
    ids = _candidates(truth, candidates)
    n = len(ids)
    total = num_rounds(n)
    if budget < n * total:
        raise ConfigError(
            f"budget {budget} too small: need at least n * ceil(log2 n) = {n * total} units")

    sim = Simulator(truth, noiseless)
    sched = SchedulerConfig(beta=beta, rng_seed=rng.stream_key(seed, "scheduler") >> 1)
    records = {a: FidelityRecord(a) for a in ids}
    states = initial_states(len(truth.keys))
    survivors = ids
    rounds: list[RoundRecord] = []

    def train(arch_ids, epochs):
        return {a: sim.train(records[a], epochs) for a in arch_ids}

    with ThreadPoolExecutor(max_workers=2) as pool:
        for k in range(total):
            r_k = resource_per_arch(budget, len(survivors), n)
            subgraphs = np.unique(truth.arch_keys[survivors]).tolist()
            epochs = r_k * unit.epochs_per_unit
            trials = len(survivors) * r_k * unit.trials_per_unit
            acc_job = pool.submit(train, survivors, epochs)
            lat_job = pool.submit(run_tuning_round, subgraphs, trials, states, sched, sim, k)
            records.update(acc_job.result())
            states, batches = lat_job.result()

            estimates = {a: (records[a].best_val_accuracy,
                             estimated_latency(truth.arch_keys[a], states)) for a in survivors}
            points = [ObjectivePoint(a, *estimates[a]) for a in survivors]
            kept = sorted(select(points))
            rounds.append(RoundRecord(
                round_index=k, survivors=list(survivors), resource=r_k,
                units=len(survivors) * r_k, epochs=len(survivors) * epochs, trials=trials,
                estimates=estimates, estimated_front=sorted(pareto_front(points)),
                kept=kept, eliminated=sorted(set(survivors) - set(kept)),
                key_best_latency=np.array([s.best_latency for s in states]),
                batches=batches))
            log.debug("round %d: |S|=%d r=%d kept=%d", k, len(survivors), r_k, len(kept))
            survivors = kept

    last = rounds[-1].estimates
    final_points = [ObjectivePoint(a, *last[a]) for a in survivors]
    trace = SearchTrace(mode=mode, budget=budget, unit=unit, seed=seed, noiseless=noiseless,
                        candidates=ids, rounds=rounds, final_survivors=list(survivors),
                        final_front=sorted(pareto_front(final_points)), nu=nu)
    if nu is not None:
        feasible = [p for p in final_points if p.latency <= nu]
        if feasible:
            best = min(feasible, key=lambda p: (-p.accuracy, p.latency, p.arch_id))
            trace.answer = best.arch_id
    return trace


def run_pareto(truth: GroundTruth, budget: int, unit: ResourceUnit = ResourceUnit(),
               seed: int = 0, noiseless: bool = False,
               candidates: Iterable[int] | None = None, beta: int = 64) -> SearchTrace:
    return _search(truth, budget, unit, seed, noiseless, candidates, beta,
                   select_pareto_halving, "pareto", None)


def run_threshold(truth: GroundTruth, budget: int, threshold: ThresholdConfig | float,
                  unit: ResourceUnit = ResourceUnit(), seed: int = 0, noiseless: bool = False,
                  candidates: Iterable[int] | None = None, beta: int = 64) -> SearchTrace:
    """Latency-constrained search; ``trace.answer`` is ``None`` if nothing is feasible."""
    if not isinstance(threshold, ThresholdConfig):
        threshold = ThresholdConfig(float(threshold))
    nu = threshold.nu
    return _search(truth, budget, unit, seed, noiseless, candidates, beta,
                   lambda pts: select_threshold(pts, nu), "threshold", nu)


@dataclass
class OracleTable:
    arch_ids: list[int]
    accuracy: np.ndarray
    latency: np.ndarray
    flops: np.ndarray
    front: list[int]
    epochs_full: int
    trials_full_per_key: int
    ledger_epochs: int
    ledger_trials: int
    ledger_units: int

    def point(self, arch_id: int) -> ObjectivePoint:
        i = self.row(arch_id)
        return ObjectivePoint(arch_id, float(self.accuracy[i]), float(self.latency[i]))

    def row(self, arch_id: int) -> int:
        if not hasattr(self, "_rows"):
            self._rows = {a: i for i, a in enumerate(self.arch_ids)}
        return self._rows[arch_id]

    def points(self) -> list[ObjectivePoint]:
        return [self.point(a) for a in self.arch_ids]


def oracle_units(n: int, num_stages: int, epochs_full: int, trials_full_per_key: int,
                 unit: ResourceUnit) -> int:
    """Units charged for fully evaluating ``n`` models one by one.

    Each model trains for ``epochs_full`` epochs and tunes every one of its
    subgraphs for ``trials_full_per_key`` trials; the two run side by side,
    so a model costs whichever axis needs more units.
    """
    per_model = max(math.ceil(epochs_full / unit.epochs_per_unit),
                    math.ceil(num_stages * trials_full_per_key / unit.trials_per_unit))
    return n * per_model


def run_brute_force(truth: GroundTruth, epochs_full: int = DEFAULT_EPOCHS_FULL,
                    trials_full_per_key: int = DEFAULT_TRIALS_FULL,
                    unit: ResourceUnit = ResourceUnit(), noiseless: bool = False,
                    candidates: Iterable[int] | None = None) -> OracleTable:
    ids = sorted(set(range(truth.n) if candidates is None else candidates))
    if epochs_full < 1 or trials_full_per_key < 1:
        raise ConfigError("full evaluation needs at least one epoch and one trial")
    sim = Simulator(truth, noiseless)
    acc = np.array([sim.train(FidelityRecord(a), epochs_full).best_val_accuracy for a in ids])
    used = np.unique(truth.arch_keys[ids])
    best = np.full(len(truth.keys), np.inf)
    for k in used:
        best[k] = sim(int(k), 0, trials_full_per_key).min()
    lat = best[truth.arch_keys[ids]].sum(axis=1)
    points = [ObjectivePoint(a, float(x), float(y)) for a, x, y in zip(ids, acc, lat)]
    stages = truth.arch_keys.shape[1]
    return OracleTable(
        arch_ids=ids, accuracy=acc, latency=lat, flops=truth.flops[ids].copy(),
        front=sorted(pareto_front(points)), epochs_full=epochs_full,
        trials_full_per_key=trials_full_per_key,
        ledger_epochs=len(ids) * epochs_full,
        ledger_trials=len(ids) * stages * trials_full_per_key,
        ledger_units=oracle_units(len(ids), stages, epochs_full, trials_full_per_key, unit))


def proxy_front(truth: GroundTruth, proxy: str = "flops",
                candidates: Iterable[int] | None = None) -> set[int]:
    """Pareto front of (true accuracy, proxy cost)."""
    if proxy != "flops":
        raise UsageError(f"unsupported latency proxy {proxy!r}")
    ids = sorted(set(range(truth.n) if candidates is None else candidates))
    return pareto_front(ObjectivePoint(a, float(truth.asymptotic_accuracy[a]),
                                       float(truth.flops[a])) for a in ids)


def true_points(truth: GroundTruth, arch_ids: Sequence[int] | None = None) -> list[ObjectivePoint]:
    ids = range(truth.n) if arch_ids is None else arch_ids
    lat = truth.true_latency
    return [ObjectivePoint(a, float(truth.asymptotic_accuracy[a]), float(lat[a])) for a in ids]
