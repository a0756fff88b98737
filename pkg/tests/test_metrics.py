import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jointsearch.engine import run_brute_force, run_pareto
from jointsearch.errors import UsageError
from jointsearch.metrics import (default_reference, gap_curve, hypervolume_2d, kendall_tau,
                                 ledger_speedup, mean_accuracy_gap, rank_table)
from jointsearch.pareto import ObjectivePoint
from oracles import brute_kendall_tau_b

REF = ObjectivePoint(-1, 0.0, 20.0)


def test_single_rectangle():
    assert hypervolume_2d([ObjectivePoint(0, 0.5, 10.0)], REF) == 5.0


def test_dominated_point_adds_nothing():
    base = [ObjectivePoint(0, 0.5, 10.0), ObjectivePoint(1, 0.8, 15.0)]
    area = hypervolume_2d(base, REF)
    assert area == pytest.approx(0.5 * 5 + 0.8 * 5)
    assert hypervolume_2d(base + [ObjectivePoint(2, 0.4, 12.0)], REF) == area
    assert hypervolume_2d(base + [ObjectivePoint(3, 0.5, 10.0)], REF) == area


def test_points_beyond_reference_ignored():
    assert hypervolume_2d([ObjectivePoint(0, 0.9, 25.0)], REF) == 0.0
    assert hypervolume_2d([], REF) == 0.0


def test_degenerate_reference():
    with pytest.raises(UsageError):
        hypervolume_2d([], SimpleNamespace(accuracy=0.0, latency=math.inf))


def test_default_reference():
    ref = default_reference([ObjectivePoint(0, 0.5, 10.0), ObjectivePoint(1, 0.6, 4.0)])
    assert (ref.accuracy, ref.latency) == (0.0, pytest.approx(11.0))


@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.1, 19.0)), min_size=1, max_size=20),
       st.tuples(st.floats(0.01, 1.0), st.floats(0.1, 19.0)))
def test_hypervolume_monotone(raw, extra):
    pts = [ObjectivePoint(i, a, l) for i, (a, l) in enumerate(raw)]
    new = ObjectivePoint(len(pts), *extra)
    assert hypervolume_2d(pts + [new], REF) >= hypervolume_2d(pts, REF) - 1e-12


def test_kendall_small_cases():
    assert kendall_tau([1, 2, 3], [1, 2, 3]) == 1.0
    assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    assert kendall_tau([1, 2, 3, 4, 5], [1, 3, 2, 4, 5]) == pytest.approx(0.8)
    assert math.isnan(kendall_tau([1, 1], [1, 2]))


@pytest.mark.parametrize("a,b", [([1], [1]), ([1, 2], [1, 2, 3]), ([[1, 2]], [[1, 2]])])
def test_kendall_invalid(a, b):
    with pytest.raises(UsageError):
        kendall_tau(a, b)


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=2, max_size=30))
def test_kendall_properties(pairs):
    a = np.array([p[0] for p in pairs], dtype=float)
    b = np.array([p[1] for p in pairs], dtype=float)
    tau = kendall_tau(a, b)
    ref = brute_kendall_tau_b(a.tolist(), b.tolist()) if len(set(a)) > 1 and len(set(b)) > 1 else math.nan
    if math.isnan(ref):
        assert math.isnan(tau)
        return
    assert tau == ref
    assert kendall_tau(-a, b) == pytest.approx(-tau)
    assert kendall_tau(np.exp(a), b ** 3) == tau


def test_rank_table_and_speedup():
    lat = [1.0, 3.0, 2.0]
    taus = rank_table(lat, {"self": lat, "reversed": [3.0, 1.0, 2.0]})
    assert taus["self"] == 1.0 and taus["reversed"] == -1.0
    assert ledger_speedup(768_000, 48_000) == 16.0
    with pytest.raises(UsageError):
        ledger_speedup(1, 0)


def test_mean_accuracy_gap():
    acc = {0: 0.9, 1: 0.8, 2: 0.85}
    lat = {0: 5.0, 1: 2.0, 2: 4.0}
    assert mean_accuracy_gap([0, 1], [0, 1], acc, lat) == 0.0
    # 1 is found; for 0 (5 ms) the best found no slower is 0.8
    assert mean_accuracy_gap([0, 1], [1], acc, lat) == pytest.approx(0.05)
    assert mean_accuracy_gap([0, 1], [2], acc, lat) == pytest.approx((0.05 + 0.8) / 2)


def test_gap_curve_on_subspace(truth):
    subspace = list(range(0, 1024, 16))
    oracle = run_brute_force(truth, candidates=subspace, noiseless=True)
    trace = run_pareto(truth, oracle.ledger_units // 16, candidates=subspace, seed=0,
                       noiseless=True)
    curve = gap_curve(trace, oracle)
    assert len(curve) == len(trace.rounds)
    assert all(b.mean_gap <= a.mean_gap for a, b in zip(curve, curve[1:]))
    assert all(b.ledger_units > a.ledger_units for a, b in zip(curve, curve[1:]))
    assert curve[-1].mean_gap <= 0.5


def test_gap_curve_zero_when_front_found(truth):
    subspace = list(range(0, 1024, 16))
    oracle = run_brute_force(truth, candidates=subspace, noiseless=True)
    fake = SimpleNamespace(candidates=subspace, rounds=[
        SimpleNamespace(round_index=0, units=10, estimated_front=list(oracle.front))])
    assert gap_curve(fake, oracle)[0].mean_gap == 0.0
    with pytest.raises(UsageError):
        gap_curve(SimpleNamespace(candidates=subspace, rounds=[]), oracle)
