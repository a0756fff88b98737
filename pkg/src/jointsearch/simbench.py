"""Simulated benchmark standing in for real training and real auto-tuning.

Ground truth per architecture is an asymptotic accuracy and a learning-curve
rate; per subgraph it is an optimal latency and a tuning spread. Evaluators
reveal them only through multi-fidelity observations:

* validation accuracy after ``e`` epochs is ``a_inf * (1 - exp(-e / tau))``
  plus zero-mean Gaussian noise keyed by ``(seed, arch_id, e)``;
* tuning trial ``t`` of a subgraph measures ``L* * (1 + X)`` with
  ``X = 0.35 * exp(spread * Z)``, ``Z`` standard normal keyed by
  ``(seed, key, t)``.

The true latency of an architecture is the sum of its subgraphs' ``L*``.

Asymptotic accuracy follows model size::

    x     = (log F - log F_min) / (log F_max - log F_min)     # F = FLOPs
    g     = (1 - exp(-2 x)) / (1 - exp(-2))                   # concave, saturating
    a_inf = 0.80 + 0.15 * clip(0.05 + 0.9 g + 0.03 Z, 0, 1)

Optimal subgraph latency is an analytic cost scaled by the hardware profile::

    cost = pointwise MACs + depthwise_factor * depthwise MACs
    L*   = 2**-20 ms * stage_multiplier * cost * (res_in / 224) ** res_exponent
           * exp(latency_noise * Z) + block_overhead_ms * depth
"""

from __future__ import annotations

import hashlib
import json
import math
from functools import cached_property
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import rng
from .errors import ConfigError, NotMeasurableError, UsageError
from .space import (SearchSpaceConfig, SubgraphKey, decompose, enumerate_space,
                    flops)

ACCURACY_BASE = 0.80
ACCURACY_SPAN = 0.15
ACCURACY_SIZE_CURVATURE = 2.0
ACCURACY_MARGIN = 0.05
ACCURACY_PERTURBATION = 0.03  # in units of the normalized size score
TAU_RANGE = (3.0, 15.0)
TAU_SIZE_WEIGHT = 0.7  # better models converge faster, so curves rarely cross
ACCURACY_NOISE_STD = 0.002
EXCESS_MEDIAN = 0.35
TUNING_SPREAD = 0.9
TUNING_SPREAD_JITTER = 0.1  # per-key spread in TUNING_SPREAD * [0.9, 1.1]
MS_PER_MAC = 2.0 ** -20
REFERENCE_RESOLUTION = 224

FORMAT_VERSION = 1


@dataclass(frozen=True)
class HardwareProfile:
    name: str
    stage_multipliers: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    resolution_penalty_exponent: float = 0.0
    depthwise_factor: float = 1.0
    block_overhead_ms: float = 0.0
    latency_noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "stage_multipliers", tuple(self.stage_multipliers))
        if any(not m > 0 for m in self.stage_multipliers):
            raise ConfigError(f"profile {self.name!r}: stage multipliers must be positive")
        if self.depthwise_factor <= 0:
            raise ConfigError(f"profile {self.name!r}: depthwise_factor must be positive")
        if self.block_overhead_ms < 0 or self.latency_noise < 0:
            raise ConfigError(f"profile {self.name!r}: overhead and noise must be >= 0")

    @property
    def is_uniform(self) -> bool:
        return (all(m == 1.0 for m in self.stage_multipliers)
                and self.resolution_penalty_exponent == 0.0
                and self.depthwise_factor == 1.0
                and self.block_overhead_ms == 0.0
                and self.latency_noise == 0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stage_multipliers"] = list(self.stage_multipliers)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "HardwareProfile":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown profile fields: {sorted(unknown)}")
        return cls(**data)


# Virtual targets; none of them is a model of real hardware.
BUILTIN_PROFILES = {
    "uniform": HardwareProfile("uniform"),
    "edge-cpu": HardwareProfile(
        "edge-cpu", stage_multipliers=(1.5, 1.2, 1.0, 0.9, 0.8),
        resolution_penalty_exponent=0.3, depthwise_factor=2.5,
        block_overhead_ms=0.4, latency_noise=0.15),
    "mips-camera": HardwareProfile(
        "mips-camera", stage_multipliers=(1.0, 1.1, 1.3, 1.3, 1.2),
        resolution_penalty_exponent=-0.2, depthwise_factor=4.0,
        block_overhead_ms=1.0, latency_noise=0.12),
    "mobile-gpu": HardwareProfile(
        "mobile-gpu", stage_multipliers=(0.6, 0.7, 0.9, 1.2, 1.6),
        resolution_penalty_exponent=0.5, depthwise_factor=1.5,
        block_overhead_ms=0.8, latency_noise=0.2),
}


def resolve_profile(name: str, extra: dict[str, HardwareProfile] | None = None) -> HardwareProfile:
    profiles = {**BUILTIN_PROFILES, **(extra or {})}
    if name not in profiles:
        raise ConfigError(f"unknown hardware profile {name!r}; available: {sorted(profiles)}")
    return profiles[name]


def _pointwise_and_depthwise_macs(key: SubgraphKey) -> tuple[int, int]:
    h_in = key.input_resolution
    h_out = max(1, h_in // 2)
    k2 = key.kernel_size ** 2
    e = key.expansion_ratio
    hid = key.in_channels * e
    pw = h_in * h_in * key.in_channels * hid + h_out * h_out * hid * key.out_channels
    dw = h_out * h_out * hid * k2
    hid = key.out_channels * e
    pw += (key.depth - 1) * 2 * h_out * h_out * key.out_channels * hid
    dw += (key.depth - 1) * h_out * h_out * hid * k2
    return pw, dw


def analytic_latency(key: SubgraphKey, profile: HardwareProfile) -> float:
    """Noise-free optimal latency of ``key`` on ``profile`` in milliseconds."""
    pw, dw = _pointwise_and_depthwise_macs(key)
    cost = pw + profile.depthwise_factor * dw
    mult = profile.stage_multipliers[min(key.stage_index, len(profile.stage_multipliers) - 1)]
    scale = (key.input_resolution / REFERENCE_RESOLUTION) ** profile.resolution_penalty_exponent
    return MS_PER_MAC * mult * cost * scale + profile.block_overhead_ms * key.depth


@dataclass(frozen=True, eq=False)
class GroundTruth:
    seed: int
    config: SearchSpaceConfig
    profile: HardwareProfile
    asymptotic_accuracy: np.ndarray  # (n,)
    curve_rate: np.ndarray  # (n,) epochs
    flops: np.ndarray  # (n,) int64
    keys: tuple[SubgraphKey, ...]  # sorted, unique
    optimal_latency: np.ndarray  # (n_keys,) ms
    tuning_spread: np.ndarray  # (n_keys,)
    arch_keys: np.ndarray  # (n, num_stages) indices into keys
    key_index: dict = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.asymptotic_accuracy)

    @property
    def true_latency(self) -> np.ndarray:
        return self.optimal_latency[self.arch_keys].sum(axis=1)

    def index_of(self, key: SubgraphKey) -> int:
        try:
            return self.key_index[key]
        except KeyError:
            raise UsageError(f"unknown subgraph key {key}") from None

    @cached_property
    def _trial_streams(self) -> tuple[int, ...]:
        return tuple(rng.stream_key(self.seed, "trial", *k.as_tuple()) for k in self.keys)

    def key_stream(self, key_idx: int) -> int:
        return self._trial_streams[key_idx]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config.to_dict(),
            "profile": self.profile.to_dict(),
            "asymptotic_accuracy": self.asymptotic_accuracy.tolist(),
            "curve_rate": self.curve_rate.tolist(),
            "flops": self.flops.tolist(),
            "keys": [list(k.as_tuple()) for k in self.keys],
            "optimal_latency": self.optimal_latency.tolist(),
            "tuning_spread": self.tuning_spread.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        config = SearchSpaceConfig.from_dict(data["config"])
        keys = tuple(SubgraphKey(*k) for k in data["keys"])
        return _assemble(
            seed=int(data["seed"]), config=config,
            profile=HardwareProfile.from_dict(data["profile"]),
            asymptotic_accuracy=np.array(data["asymptotic_accuracy"], dtype=float),
            curve_rate=np.array(data["curve_rate"], dtype=float),
            flops=np.array(data["flops"], dtype=np.int64),
            keys=keys,
            optimal_latency=np.array(data["optimal_latency"], dtype=float),
            tuning_spread=np.array(data["tuning_spread"], dtype=float),
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _assemble(*, seed, config, profile, asymptotic_accuracy, curve_rate, flops,
              keys, optimal_latency, tuning_spread) -> GroundTruth:
    key_index = {k: i for i, k in enumerate(keys)}
    archs = enumerate_space(config)
    arch_keys = np.array([[key_index[k] for k in decompose(a, config)] for a in archs],
                         dtype=np.int64)
    return GroundTruth(seed, config, profile, asymptotic_accuracy, curve_rate, flops,
                       keys, optimal_latency, tuning_spread, arch_keys, key_index)


def size_score(flop_counts: np.ndarray) -> np.ndarray:
    """Concave saturating map of log-FLOPs onto [0, 1]."""
    logf = np.log(flop_counts.astype(float))
    span = logf.max() - logf.min()
    x = (logf - logf.min()) / span if span > 0 else np.zeros_like(logf)
    c = ACCURACY_SIZE_CURVATURE
    return (1.0 - np.exp(-c * x)) / (1.0 - math.exp(-c))


def generate_ground_truth(seed: int, config: SearchSpaceConfig,
                          profile: HardwareProfile) -> GroundTruth:
    archs = enumerate_space(config)
    ids = np.arange(len(archs))
    flop_counts = np.array([flops(a, config) for a in archs], dtype=np.int64)

    g = size_score(flop_counts)
    z = rng.normal(rng.stream_key(seed, "accuracy"), ids)
    score = np.clip(ACCURACY_MARGIN + (1 - 2 * ACCURACY_MARGIN) * g
                    + ACCURACY_PERTURBATION * z, 0.0, 1.0)
    a_inf = ACCURACY_BASE + ACCURACY_SPAN * score

    lo, hi = TAU_RANGE
    u = rng.uniform(rng.stream_key(seed, "tau"), ids)
    tau = lo + (hi - lo) * (TAU_SIZE_WEIGHT * (1.0 - score) + (1.0 - TAU_SIZE_WEIGHT) * u)

    keys = sorted({k for a in archs for k in decompose(a, config)})
    lstar = np.empty(len(keys))
    spread = np.empty(len(keys))
    for i, key in enumerate(keys):
        base = analytic_latency(key, profile)
        if profile.latency_noise:
            zk = rng.normal(rng.stream_key(seed, "lstar", profile.name, *key.as_tuple()), [0])[0]
            base *= math.exp(profile.latency_noise * zk)
        lstar[i] = base
        u = rng.uniform(rng.stream_key(seed, "spread", *key.as_tuple()), [0])[0]
        spread[i] = TUNING_SPREAD * (1.0 + TUNING_SPREAD_JITTER * (2 * u - 1))

    return _assemble(seed=seed, config=config, profile=profile,
                     asymptotic_accuracy=a_inf, curve_rate=tau, flops=flop_counts,
                     keys=tuple(keys), optimal_latency=lstar, tuning_spread=spread)


@dataclass(frozen=True)
class FidelityRecord:
    arch_id: int
    epochs_trained: int = 0
    best_val_accuracy: float = 0.0


@dataclass(frozen=True)
class TuningState:
    key_index: int
    trials_spent: int = 0
    best_latency: float = math.inf
    last_improvement: float = math.inf


def accuracy_curve(truth: GroundTruth, arch_id: int, epochs, noiseless: bool = False) -> np.ndarray:
    """Validation accuracy observed at each epoch number in ``epochs``."""
    e = np.asarray(epochs, dtype=float)
    acc = truth.asymptotic_accuracy[arch_id] * -np.expm1(-e / truth.curve_rate[arch_id])
    if not noiseless:
        key = rng.stream_key(truth.seed, "epoch", arch_id)
        acc = acc + ACCURACY_NOISE_STD * rng.normal(key, np.asarray(epochs, dtype=np.int64))
    return np.clip(acc, 0.0, 1.0)


def train_epochs(truth: GroundTruth, record: FidelityRecord, epochs: int,
                 noiseless: bool = False) -> FidelityRecord:
    if epochs < 0:
        raise UsageError("epochs must be >= 0")
    if epochs == 0:
        return record
    start = record.epochs_trained
    seen = accuracy_curve(truth, record.arch_id, np.arange(start + 1, start + epochs + 1), noiseless)
    return replace(record, epochs_trained=start + epochs,
                   best_val_accuracy=max(record.best_val_accuracy, float(seen.max())))


def sample_trials(truth: GroundTruth, key_idx: int, start: int, count: int,
                  noiseless: bool = False) -> np.ndarray:
    """Latencies measured by trials ``start, ..., start + count - 1`` of one subgraph."""
    if start < 0 or count < 0:
        raise UsageError("trial indices must be >= 0")
    if not 0 <= key_idx < len(truth.keys):
        raise UsageError(f"unknown subgraph index {key_idx}")
    lstar = truth.optimal_latency[key_idx]
    if noiseless:
        return np.full(count, lstar)
    z = rng.normal(truth.key_stream(key_idx), np.arange(start, start + count))
    excess = EXCESS_MEDIAN * np.exp(truth.tuning_spread[key_idx] * z)
    return lstar * (1.0 + excess)


def sample_trial(truth: GroundTruth, key: SubgraphKey, trial_index: int,
                 noiseless: bool = False) -> float:
    return float(sample_trials(truth, truth.index_of(key), trial_index, 1, noiseless)[0])


class Simulator:
    """Trial evaluator bound to a ground truth and a noise mode.

    Samples are generated in vectorized chunks and cached per subgraph; the
    values are identical to ``sample_trials`` because draws are counter-based.
    """

    CHUNK = 4096

    def __init__(self, truth: GroundTruth, noiseless: bool = False):
        self.truth = truth
        self.noiseless = noiseless
        self._cache: dict[int, np.ndarray] = {}

    def __call__(self, key_idx: int, start: int, count: int) -> np.ndarray:
        end = start + count
        cached = self._cache.get(key_idx)
        have = 0 if cached is None else len(cached)
        if end > have:
            grow = max(end - have, self.CHUNK, have)
            fresh = sample_trials(self.truth, key_idx, have, grow, self.noiseless)
            cached = fresh if cached is None else np.concatenate([cached, fresh])
            self._cache[key_idx] = cached
        return cached[start:end]

    def train(self, record: FidelityRecord, epochs: int) -> FidelityRecord:
        return train_epochs(self.truth, record, epochs, self.noiseless)


def estimated_latency(key_indices, states) -> float:
    """Sum of best-so-far subgraph latencies; every subgraph must have been tried."""
    total = 0.0
    for k in key_indices:
        state = states[k]
        if state.trials_spent < 1:
            raise NotMeasurableError(f"subgraph {k} has not been tuned yet")
        total += state.best_latency
    return total
