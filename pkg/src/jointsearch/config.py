"""Run configuration: a versioned YAML document.

Example::

    schema_version: 1
    seed: 7
    space: default        # or a mapping of SearchSpaceConfig fields
    profile: edge-cpu
    profiles: {}                 # extra named hardware profiles
    mode: pareto                 # or threshold (requires nu, in ms)
    nu: null
    budget: null                 # resource units; null = oracle ledger / 16
    unit: {epochs_per_unit: 1, trials_per_unit: 64}
    beta: 64
    noiseless: false
    oracle: {epochs_full: 750, trials_full_per_key: 4096}
    output_dir: results
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .engine import DEFAULT_EPOCHS_FULL, DEFAULT_TRIALS_FULL, ResourceUnit, oracle_units
from .errors import ConfigError
from .simbench import HardwareProfile, resolve_profile
from .space import SearchSpaceConfig

SCHEMA_VERSION = 1
DEFAULT_BUDGET_DIVISOR = 16

_KNOWN = {"schema_version", "seed", "space", "profile", "profiles", "mode", "nu", "budget",
          "unit", "beta", "noiseless", "oracle", "output_dir"}


@dataclass
class RunConfig:
    seed: int = 0
    space: SearchSpaceConfig = field(default_factory=SearchSpaceConfig)
    profile: HardwareProfile = field(default_factory=lambda: resolve_profile("uniform"))
    mode: str = "pareto"
    nu: float | None = None
    budget: int | None = None
    unit: ResourceUnit = field(default_factory=ResourceUnit)
    beta: int = 64
    noiseless: bool = False
    epochs_full: int = DEFAULT_EPOCHS_FULL
    trials_full_per_key: int = DEFAULT_TRIALS_FULL
    output_dir: Path = Path("results")

    def __post_init__(self):
        if self.mode not in ("pareto", "threshold"):
            raise ConfigError(f"mode must be 'pareto' or 'threshold', got {self.mode!r}")
        if self.mode == "threshold":
            if self.nu is None:
                raise ConfigError("threshold mode requires nu")
            if not self.nu > 0:
                raise ConfigError("nu must be positive")
        if self.beta < 1:
            raise ConfigError("beta must be >= 1")
        n = self.space.size
        rounds = (n - 1).bit_length()
        if n < 2:
            raise ConfigError("search space must contain at least two architectures")
        if self.budget is not None and self.budget < n * rounds:
            raise ConfigError(f"budget {self.budget} below n * ceil(log2 n) = {n * rounds}")
        if self.effective_budget < n * rounds:
            raise ConfigError("derived budget too small; raise oracle fullness or set budget")

    @property
    def oracle_units(self) -> int:
        return oracle_units(self.space.size, self.space.num_stages, self.epochs_full,
                            self.trials_full_per_key, self.unit)

    @property
    def effective_budget(self) -> int:
        if self.budget is not None:
            return self.budget
        return self.oracle_units // DEFAULT_BUDGET_DIVISOR

    def benchmark_dict(self) -> dict:
        return {"seed": self.seed, "space": self.space.to_dict(),
                "profile": self.profile.to_dict()}

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            **self.benchmark_dict(),
            "mode": self.mode, "nu": self.nu, "budget": self.effective_budget,
            "unit": {"epochs_per_unit": self.unit.epochs_per_unit,
                     "trials_per_unit": self.unit.trials_per_unit},
            "beta": self.beta, "noiseless": self.noiseless,
            "oracle": {"epochs_full": self.epochs_full,
                       "trials_full_per_key": self.trials_full_per_key},
        }

    def benchmark_hash(self) -> str:
        return _digest(self.benchmark_dict())

    def config_hash(self) -> str:
        return _digest(self.to_dict())


def _digest(data: dict) -> str:
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()[:16]


def from_mapping(data: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")

    space = data.get("space", "default")
    if space in (None, "default"):
        space_cfg = SearchSpaceConfig()
    elif isinstance(space, dict):
        space_cfg = SearchSpaceConfig.from_dict(space)
    else:
        raise ConfigError(f"space must be 'default' or a mapping, got {space!r}")

    extra = {}
    for name, fields in (data.get("profiles") or {}).items():
        extra[name] = HardwareProfile.from_dict({"name": name, **fields})
    profile = resolve_profile(data.get("profile", "uniform"), extra)
    if len(profile.stage_multipliers) < space_cfg.num_stages:
        raise ConfigError(f"profile {profile.name!r} has fewer stage multipliers than stages")

    unit = data.get("unit") or {}
    oracle = data.get("oracle") or {}
    try:
        out = Path(data.get("output_dir", "results"))
        if base_dir is not None and not out.is_absolute():
            out = base_dir / out
        return RunConfig(
            seed=int(data.get("seed", 0)), space=space_cfg, profile=profile,
            mode=data.get("mode", "pareto"),
            nu=None if data.get("nu") is None else float(data["nu"]),
            budget=None if data.get("budget") is None else int(data["budget"]),
            unit=ResourceUnit(**unit), beta=int(data.get("beta", 64)),
            noiseless=bool(data.get("noiseless", False)),
            epochs_full=int(oracle.get("epochs_full", DEFAULT_EPOCHS_FULL)),
            trials_full_per_key=int(oracle.get("trials_full_per_key", DEFAULT_TRIALS_FULL)),
            output_dir=out)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return from_mapping(data or {})
