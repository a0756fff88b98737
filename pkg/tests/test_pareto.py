import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointsearch.errors import UsageError
from jointsearch.pareto import (ObjectivePoint, dominates, nds, pareto_front,
                                select_pareto_halving, select_threshold)
from oracles import brute_front, brute_halving, brute_nds, brute_threshold

# a coarse grid makes ties and duplicates common
coord = st.integers(0, 12)
point_sets = st.lists(st.tuples(coord, coord), min_size=1, max_size=40)


def make_points(raw):
    return [ObjectivePoint(i, a / 12, 1.0 + l) for i, (a, l) in enumerate(raw)]


def as_dict(points):
    return {p.arch_id: (p.accuracy, p.latency) for p in points}


def test_dominance_basics():
    a = ObjectivePoint(0, 0.9, 5.0)
    b = ObjectivePoint(1, 0.8, 6.0)
    c = ObjectivePoint(2, 0.9, 5.0)
    assert dominates(a, b) and not dominates(b, a)
    assert not dominates(a, c) and not dominates(c, a)


def test_single_point():
    pts = [ObjectivePoint(7, 0.5, 3.0)]
    assert pareto_front(pts) == {7}
    assert nds(pts).fronts == (frozenset({7}),)
    assert select_pareto_halving(pts) == {7}


def test_duplicates_share_a_front():
    pts = [ObjectivePoint(i, 0.7, 2.0) for i in range(4)]
    assert pareto_front(pts) == {0, 1, 2, 3}
    assert len(nds(pts).fronts) == 1


def test_halving_keeps_crossing_front_whole():
    # two fronts of sizes 1 and 3 over four points: the second is needed to
    # pass the halfway mark, so all four survive
    pts = [ObjectivePoint(0, 0.9, 1.0), ObjectivePoint(1, 0.8, 1.5),
           ObjectivePoint(2, 0.85, 2.0), ObjectivePoint(3, 0.5, 1.2)]
    assert nds(pts).fronts[0] == {0}
    assert select_pareto_halving(pts) == {0, 1, 2, 3}


def test_halving_chain_selects_half():
    trade_off = [ObjectivePoint(i, 0.9 - 0.01 * i, 1.0 - 0.1 * i) for i in range(8)]
    assert select_pareto_halving(trade_off) == set(range(8))
    chain = [ObjectivePoint(i, 0.9 - 0.01 * i, 1.0) for i in range(8)]
    # each point dominates the next: 8 singleton fronts, keep 5 (4 is not past half)
    assert len(nds(chain).fronts) == 8
    assert select_pareto_halving(chain) == {0, 1, 2, 3, 4}


def test_threshold_rule():
    pts = [ObjectivePoint(0, 0.90, 4.0), ObjectivePoint(1, 0.80, 3.0),
           ObjectivePoint(2, 0.85, 2.0), ObjectivePoint(3, 0.95, 9.0),
           ObjectivePoint(4, 0.70, 8.0)]
    # below nu=5: {0,1,2}, keep ceil(3/2)=2 best by accuracy; above: halving of {3,4}
    # keeps both since one front of two already reaches half
    assert select_threshold(pts, 5.0) == {0, 2, 3, 4}
    assert select_threshold(pts, 100.0) == {0, 2, 3}
    assert select_threshold(pts, 1.0) == select_pareto_halving(pts)


@pytest.mark.parametrize("bad", [
    lambda: ObjectivePoint(0, 1.5, 1.0),
    lambda: ObjectivePoint(0, 0.5, 0.0),
    lambda: ObjectivePoint(0, 0.5, float("inf")),
    lambda: pareto_front([]),
    lambda: nds([ObjectivePoint(0, 0.5, 1.0), ObjectivePoint(0, 0.6, 1.0)]),
    lambda: select_threshold([ObjectivePoint(0, 0.5, 1.0)], 0.0),
])
def test_invalid_inputs(bad):
    with pytest.raises(UsageError):
        bad()


@given(point_sets)
def test_front_matches_brute_force(raw):
    pts = make_points(raw)
    assert pareto_front(pts) == brute_front(as_dict(pts))


@given(point_sets)
def test_nds_matches_brute_force_and_partitions(raw):
    pts = make_points(raw)
    fronts = nds(pts).fronts
    assert [set(f) for f in fronts] == brute_nds(as_dict(pts))
    assert sum(len(f) for f in fronts) == len(pts)
    assert set().union(*fronts) == {p.arch_id for p in pts}


@given(point_sets)
def test_rank_k_not_dominated_by_rank_k_or_later(raw):
    pts = make_points(raw)
    ranking = nds(pts)
    by_id = {p.arch_id: p for p in pts}
    for p in pts:
        for q in pts:
            if dominates(q, p):
                assert ranking.rank_of(q.arch_id) < ranking.rank_of(p.arch_id)
    assert ranking.fronts[0] == pareto_front(by_id.values())


@given(point_sets)
def test_halving_properties(raw):
    pts = make_points(raw)
    kept = select_pareto_halving(pts)
    assert kept == brute_halving(as_dict(pts))
    assert pareto_front(pts) <= kept
    assert len(kept) >= (len(pts) + 1) // 2 or len(pts) == 1


@given(point_sets)
@settings(max_examples=50)
def test_halving_is_permutation_invariant(raw):
    pts = make_points(raw)
    assert select_pareto_halving(pts) == select_pareto_halving(pts[::-1])


@given(point_sets, st.integers(1, 14))
def test_threshold_matches_brute_force(raw, nu):
    pts = make_points(raw)
    assert select_threshold(pts, float(nu)) == brute_threshold(as_dict(pts), float(nu))
