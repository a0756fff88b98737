"""MobileNetV3-like search space: enumeration, stage decomposition and FLOPs.

Enumeration order is lexicographic over
``(resolution, width_multiplier, expansion_ratio, stage_depths[0], ..., stage_depths[-1])``
with the last field varying fastest and each field ordered as listed in the
config. ``arch_id`` is the position in that order (a mixed-radix number).

Each stage is one subgraph made of ``depth`` inverted-residual blocks. The
first block of stage ``i`` has stride 2, so stage ``i`` sees an input
resolution of ``resolution >> i`` and produces ``resolution >> (i + 1)``
(floor division, clamped to at least 1). Stage 0 reads the 3-channel image.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, UsageError

IMAGE_CHANNELS = 3


@dataclass(frozen=True)
class SearchSpaceConfig:
    resolutions: tuple[int, ...] = (128, 160, 192, 224)
    width_multipliers: tuple[float, ...] = (0.25, 0.50, 0.75, 1.00)
    expansion_ratios: tuple[int, ...] = (3, 6)
    stage_depth_choices: tuple[int, ...] = (2, 3)
    num_stages: int = 5
    base_stage_channels: tuple[int, ...] = (16, 24, 40, 80, 160)
    kernel_size: int = 3

    def __post_init__(self):
        # accept lists from config files
        for name in ("resolutions", "width_multipliers", "expansion_ratios",
                     "stage_depth_choices", "base_stage_channels"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        for name in ("resolutions", "width_multipliers", "expansion_ratios",
                     "stage_depth_choices", "base_stage_channels"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} must be non-empty")
            if len(set(values)) != len(values):
                raise ConfigError(f"{name} contains duplicates: {values}")
            if any(v <= 0 for v in values):
                raise ConfigError(f"{name} must be positive: {values}")
        if self.num_stages < 1:
            raise ConfigError("num_stages must be >= 1")
        if len(self.base_stage_channels) != self.num_stages:
            raise ConfigError(
                f"base_stage_channels has {len(self.base_stage_channels)} entries, "
                f"expected num_stages={self.num_stages}"
            )
        if self.kernel_size < 1:
            raise ConfigError("kernel_size must be >= 1")

    @property
    def size(self) -> int:
        return (len(self.resolutions) * len(self.width_multipliers)
                * len(self.expansion_ratios)
                * len(self.stage_depth_choices) ** self.num_stages)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "SearchSpaceConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown search-space fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ArchitectureSpec:
    resolution: int
    width_multiplier: float
    expansion_ratio: int
    stage_depths: tuple[int, ...]
    arch_id: int = field(default=-1, compare=False)

    def to_dict(self) -> dict:
        return {
            "arch_id": self.arch_id,
            "resolution": self.resolution,
            "width_multiplier": self.width_multiplier,
            "expansion_ratio": self.expansion_ratio,
            "stage_depths": list(self.stage_depths),
        }


@dataclass(frozen=True, order=True)
class SubgraphKey:
    stage_index: int
    input_resolution: int
    in_channels: int
    out_channels: int
    expansion_ratio: int
    depth: int
    kernel_size: int

    def as_tuple(self) -> tuple[int, ...]:
        return (self.stage_index, self.input_resolution, self.in_channels,
                self.out_channels, self.expansion_ratio, self.depth, self.kernel_size)


def _radices(config: SearchSpaceConfig) -> list[int]:
    return ([len(config.resolutions), len(config.width_multipliers),
             len(config.expansion_ratios)]
            + [len(config.stage_depth_choices)] * config.num_stages)


def encode(arch: ArchitectureSpec, config: SearchSpaceConfig) -> int:
    """Mixed-radix index of ``arch`` in the enumeration order."""
    if len(arch.stage_depths) != config.num_stages:
        raise UsageError(f"expected {config.num_stages} stage depths, got {len(arch.stage_depths)}")
    try:
        digits = [config.resolutions.index(arch.resolution),
                  config.width_multipliers.index(arch.width_multiplier),
                  config.expansion_ratios.index(arch.expansion_ratio)]
        digits += [config.stage_depth_choices.index(d) for d in arch.stage_depths]
    except ValueError as exc:
        raise UsageError(f"architecture not in search space: {arch}") from exc
    index = 0
    for digit, radix in zip(digits, _radices(config)):
        index = index * radix + digit
    return index


def decode(arch_id: int, config: SearchSpaceConfig) -> ArchitectureSpec:
    if not 0 <= arch_id < config.size:
        raise UsageError(f"arch_id {arch_id} outside [0, {config.size})")
    digits = []
    rest = arch_id
    for radix in reversed(_radices(config)):
        rest, digit = divmod(rest, radix)
        digits.append(digit)
    digits.reverse()
    return ArchitectureSpec(
        resolution=config.resolutions[digits[0]],
        width_multiplier=config.width_multipliers[digits[1]],
        expansion_ratio=config.expansion_ratios[digits[2]],
        stage_depths=tuple(config.stage_depth_choices[d] for d in digits[3:]),
        arch_id=arch_id,
    )


def enumerate_space(config: SearchSpaceConfig) -> list[ArchitectureSpec]:
    config.validate()
    return [decode(i, config) for i in range(config.size)]


def scale_channels(base: int, width_multiplier: float) -> int:
    """Round-half-up ``base * width_multiplier``, clamped to at least 1."""
    return max(1, math.floor(base * width_multiplier + 0.5))


def stage_resolution(resolution: int, stage_index: int) -> int:
    """Input resolution seen by ``stage_index``."""
    return max(1, resolution >> stage_index)


def decompose(arch: ArchitectureSpec, config: SearchSpaceConfig) -> list[SubgraphKey]:
    keys = []
    in_channels = IMAGE_CHANNELS
    for i, depth in enumerate(arch.stage_depths):
        out_channels = scale_channels(config.base_stage_channels[i], arch.width_multiplier)
        keys.append(SubgraphKey(
            stage_index=i,
            input_resolution=stage_resolution(arch.resolution, i),
            in_channels=in_channels,
            out_channels=out_channels,
            expansion_ratio=arch.expansion_ratio,
            depth=depth,
            kernel_size=config.kernel_size,
        ))
        in_channels = out_channels
    return keys


def subgraph_flops(key: SubgraphKey) -> int:
    """Multiply-accumulates of one stage of inverted-residual blocks.

    First block (stride 2): 1x1 expand at the input resolution, kxk depthwise
    producing the halved resolution, 1x1 project at the halved resolution.
    Remaining ``depth - 1`` blocks run at the halved resolution with
    ``out_channels`` in and out.
    """
    h_in = key.input_resolution
    h_out = max(1, h_in // 2)
    k2 = key.kernel_size ** 2
    e = key.expansion_ratio

    hidden = key.in_channels * e
    first = (h_in * h_in * key.in_channels * hidden
             + h_out * h_out * hidden * k2
             + h_out * h_out * hidden * key.out_channels)

    hidden = key.out_channels * e
    rest = (h_out * h_out * key.out_channels * hidden
            + h_out * h_out * hidden * k2
            + h_out * h_out * hidden * key.out_channels)
    return first + (key.depth - 1) * rest


def flops(arch: ArchitectureSpec, config: SearchSpaceConfig) -> int:
    return sum(subgraph_flops(k) for k in decompose(arch, config))
