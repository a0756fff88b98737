"""Dominance, non-dominated sorting and the two elimination rules.

Accuracy is maximized and latency minimized throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class ObjectivePoint:
    arch_id: int
    accuracy: float
    latency: float

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise UsageError(f"accuracy {self.accuracy} outside [0, 1]")
        if not (math.isfinite(self.latency) and self.latency > 0):
            raise UsageError(f"latency {self.latency} must be finite and positive")


@dataclass(frozen=True)
class NdsRanking:
    fronts: tuple[frozenset[int], ...]

    def rank_of(self, arch_id: int) -> int:
        """1-based front index of ``arch_id``."""
        for rank, front in enumerate(self.fronts, start=1):
            if arch_id in front:
                return rank
        raise KeyError(arch_id)


def dominates(p: ObjectivePoint, q: ObjectivePoint) -> bool:
    return (p.accuracy >= q.accuracy and p.latency <= q.latency
            and (p.accuracy > q.accuracy or p.latency < q.latency))


def _as_list(points: Iterable[ObjectivePoint]) -> list[ObjectivePoint]:
    pts = list(points)
    if not pts:
        raise UsageError("point set must be non-empty")
    ids = [p.arch_id for p in pts]
    if len(set(ids)) != len(ids):
        raise UsageError("arch_ids must be distinct")
    return pts


def _dominance_matrix(pts: Sequence[ObjectivePoint]) -> np.ndarray:
    acc = np.array([p.accuracy for p in pts])
    lat = np.array([p.latency for p in pts])
    ge = (acc[:, None] >= acc[None, :]) & (lat[:, None] <= lat[None, :])
    strict = (acc[:, None] > acc[None, :]) | (lat[:, None] < lat[None, :])
    return ge & strict  # [i, j]: i dominates j


def pareto_front(points: Iterable[ObjectivePoint]) -> set[int]:
    pts = _as_list(points)
    dominated = _dominance_matrix(pts).any(axis=0)
    return {p.arch_id for p, d in zip(pts, dominated) if not d}


def nds(points: Iterable[ObjectivePoint]) -> NdsRanking:
    """Fast non-dominated sort (domination counts peeled front by front)."""
    pts = _as_list(points)
    dom = _dominance_matrix(pts)
    counts = dom.sum(axis=0)
    current = np.flatnonzero(counts == 0)
    fronts = []
    while current.size:
        fronts.append(frozenset(pts[i].arch_id for i in current))
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return NdsRanking(tuple(fronts))


def select_pareto_halving(points: Iterable[ObjectivePoint]) -> set[int]:
    """Add whole NDS fronts while the selection holds at most half the input.

    The front that crosses the halfway mark is kept in full, so the result
    always contains the first front.
    """
    pts = _as_list(points)
    n = len(pts)
    selected: set[int] = set()
    for front in nds(pts).fronts:
        if 2 * len(selected) > n:
            break
        selected |= front
    return selected


def select_threshold(points: Iterable[ObjectivePoint], nu: float) -> set[int]:
    """Top half by accuracy below ``nu``; Pareto halving above it."""
    if not nu > 0:
        raise UsageError(f"latency threshold must be positive, got {nu}")
    pts = _as_list(points)
    below = [p for p in pts if p.latency <= nu]
    above = [p for p in pts if p.latency > nu]
    keep: set[int] = set()
    if below:
        below.sort(key=lambda p: (-p.accuracy, p.latency, p.arch_id))
        keep.update(p.arch_id for p in below[: (len(below) + 1) // 2])
    if above:
        keep |= select_pareto_halving(above)
    return keep
