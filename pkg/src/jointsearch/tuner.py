"""Priority-queue allocation of tuning trials across shared subgraphs.

Each dequeue runs one batch of ``beta`` trials on the task whose last batch
improved its best latency the most. Never-tuned tasks carry an infinite
priority so every task gets a baseline batch first. A task's first batch has
no previous best, so its improvement is measured from the batch's first
trial to the batch's best. Ties are broken uniformly at random.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import UsageError
from .simbench import TuningState

IMPROVEMENT_EPS = 1e-12

# (key_index, start_trial, count) -> measured latencies
Evaluator = Callable[[int, int, int], np.ndarray]


@dataclass(frozen=True)
class SchedulerConfig:
    beta: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        if self.beta < 1:
            raise UsageError("beta must be >= 1")


@dataclass(frozen=True)
class BatchRecord:
    key_index: int
    batch_size: int
    improvement: float


def initial_states(n_keys: int) -> list[TuningState]:
    return [TuningState(key_index=i) for i in range(n_keys)]


def priority(state: TuningState) -> float:
    return math.inf if state.trials_spent == 0 else state.last_improvement


def run_tuning_round(keys: Sequence[int], trial_budget: int, states: Sequence[TuningState],
                     sched: SchedulerConfig, evaluator: Evaluator,
                     round_index: int = 0) -> tuple[list[TuningState], list[BatchRecord]]:
    """Spend exactly ``trial_budget`` trials over ``keys``.

    ``states`` is indexed by key index and is not modified; the updated list
    is returned together with one ``BatchRecord`` per dequeue.
    """
    if trial_budget < 0:
        raise UsageError("trial budget must be >= 0")
    keys = sorted(set(keys))
    if not keys:
        raise UsageError("at least one subgraph is required")
    states = list(states)
    trace: list[BatchRecord] = []
    if trial_budget == 0:
        return states, trace

    gen = np.random.default_rng([sched.rng_seed, round_index])
    prio = np.array([priority(states[k]) for k in keys])
    remaining = trial_budget
    while remaining > 0:
        ties = np.flatnonzero(prio == prio.max())
        slot = ties[0] if len(ties) == 1 else ties[gen.integers(len(ties))]
        k = keys[slot]
        state = states[k]
        count = min(sched.beta, remaining)
        samples = evaluator(k, state.trials_spent, count)
        best = min(state.best_latency, float(samples.min()))
        before = state.best_latency if state.trials_spent else float(samples[0])
        gain = before - best
        if gain < IMPROVEMENT_EPS:
            gain = 0.0
        states[k] = replace(state, trials_spent=state.trials_spent + count,
                            best_latency=best, last_improvement=gain)
        prio[slot] = gain
        trace.append(BatchRecord(k, count, gain))
        remaining -= count
    return states, trace
