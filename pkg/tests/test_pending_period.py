import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppa.pending_period import (
    AssignedTrace,
    OverlapIndex,
    Provenance,
    UnassignableTrace,
    assign_pending_periods,
    measure_C,
    overlap_histogram,
    overlap_set,
    overlaps,
    physically_before,
)
from ppa.simulator import SimConfig, generate_execution, legality_violations, sample_observations

from .conftest import make_assigned, make_trace, random_periods_trace


def test_eight_ops_with_only_endpoints_observed():
    rows = [(0, "W", 0, 1, 3, 6)] + [(0, "R", 0, 1, None, None)] * 6 + [(0, "R", 0, 1, 40, 44)]
    a = make_assigned(1, rows)
    for i in range(1, 7):
        assert a.periods[i] == (3, 44)
        assert a.provenance[i] is Provenance.INFERRED
    assert a.periods[0] == (3, 6) and a.periods[7] == (40, 44)


def test_inference_uses_nearest_observed_neighbours():
    rows = [(0, "W", 0, 1, 0, 2), (0, "R", 0, 1, None, None), (0, "W", 0, 2, 5, 9),
            (0, "R", 0, 2, None, None), (0, "R", 0, 2, None, None), (0, "W", 0, 3, 12, 20)]
    a = make_assigned(1, rows)
    assert a.periods[1] == (0, 9)
    assert a.periods[3] == a.periods[4] == (5, 20)


def test_fully_observed_trace_is_identity():
    t = make_trace(2, [(0, "W", 0, 1, 0, 3), (1, "R", 0, 1, 2, 6), (0, "R", 0, 1, 4, 5)])
    a = assign_pending_periods(t)
    assert all(a.periods[op.id] == (op.start, op.end) for op in t.ops)
    assert set(a.provenance.values()) == {Provenance.OBSERVED}


def test_invalid_trace_cannot_be_assigned():
    with pytest.raises(UnassignableTrace):
        assign_pending_periods(make_trace(1, [(0, "W", 0, 1, None, None)]))


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("m", [1, 2, 3, 7, 100])
def test_inferred_periods_contain_performed_time(seed, m):
    ann = generate_execution(SimConfig(num_procs=3, ops_per_proc=12, max_pending_len=5, seed=seed))
    a = assign_pending_periods(sample_observations(ann, m))
    assert legality_violations(ann, a.periods) == []


@pytest.mark.parametrize("seed", range(5))
def test_coarser_observation_never_shrinks_periods(seed):
    ann = generate_execution(SimConfig(num_procs=2, ops_per_proc=24, seed=seed))
    # nested rates: every op observed at m=6 is also observed at m=2 and m=3
    for fine, coarse in [(1, 2), (2, 6), (3, 6), (6, 12)]:
        pf = assign_pending_periods(sample_observations(ann, fine)).periods
        pc = assign_pending_periods(sample_observations(ann, coarse)).periods
        for op_id, (s, e) in pf.items():
            cs, ce = pc[op_id]
            assert cs <= s and e <= ce


def test_disjoint_and_overlapping_periods():
    a = make_assigned(2, [(0, "W", 0, 1, 0, 2), (1, "R", 0, 1, 5, 8)])
    assert physically_before(a, 0, 1) and not physically_before(a, 1, 0)
    b = make_assigned(2, [(0, "W", 0, 1, 0, 5), (1, "R", 0, 1, 3, 8)])
    assert not physically_before(b, 0, 1) and not physically_before(b, 1, 0)
    assert not physically_before(a, 0, 0)


def test_touching_periods_overlap():
    a = make_assigned(2, [(0, "W", 0, 1, 0, 5), (1, "R", 0, 1, 5, 8)])
    assert not physically_before(a, 0, 1)
    assert overlaps(a, 0, 1)


def test_unknown_id_raises():
    a = make_assigned(1, [(0, "W", 0, 1, 0, 5)])
    with pytest.raises(KeyError):
        physically_before(a, 0, 9)
    with pytest.raises(KeyError):
        overlap_set(OverlapIndex(a), 9)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_time_order_is_strict_partial_order_with_trichotomy(r):
    a = random_periods_trace(r)
    ids = [op.id for op in a.ops]
    for u in ids:
        assert not physically_before(a, u, u)
        for v in ids:
            uv, vu = physically_before(a, u, v), physically_before(a, v, u)
            assert not (uv and vu)
            third = u == v or overlaps(a, u, v)
            assert [uv, vu, third].count(True) == 1
            for w in ids:
                if uv and physically_before(a, v, w):
                    assert physically_before(a, u, w)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_overlap_set_matches_pairwise_scan(r):
    a = random_periods_trace(r, max_ops=14)
    index = OverlapIndex(a)
    for op in a.ops:
        brute = {v.id for v in a.ops if v.id != op.id
                 and not physically_before(a, op.id, v.id) and not physically_before(a, v.id, op.id)}
        assert overlap_set(index, op.id) == brute
    lo, hi = r.randint(0, 20), r.randint(0, 30)
    assert index.query(lo, hi) == {v.id for v in a.ops if not (a.end(v.id) < lo or hi < a.start(v.id))}


def test_isolated_and_covering_ops():
    a = make_assigned(2, [(0, "W", 0, 1, 0, 100), (1, "R", 0, 1, 10, 12), (1, "R", 0, 1, 20, 22), (1, "R", 0, 1, 200, 201)])
    index = OverlapIndex(a)
    assert overlap_set(index, 3) == set()
    assert overlap_set(index, 0) == {1, 2}


def _brute_C(a):
    best = 0
    for u in a.ops:
        for j in range(a.num_procs):
            best = max(best, sum(1 for v in a.ops if v.proc == j and v.id != u.id and overlaps(a, u.id, v.id)))
    return best


def test_measure_C_cases():
    disjoint = make_assigned(2, [(0, "W", 0, 1, 0, 1), (1, "R", 0, 1, 3, 4), (0, "R", 0, 1, 6, 7)])
    assert measure_C(disjoint) == 0
    same = make_assigned(1, [(0, "W", 0, 1, 0, 9)] * 5)
    assert measure_C(same) == 4
    assert measure_C(make_assigned(1, [])) == 0


@pytest.mark.parametrize("seed", range(8))
def test_measure_C_matches_brute_force_on_simulated(seed):
    ann = generate_execution(SimConfig(num_procs=3, ops_per_proc=10, max_pending_len=9, seed=seed))
    a = assign_pending_periods(sample_observations(ann, 1 + seed % 3))
    assert measure_C(a) == _brute_C(a)
    assert sum(overlap_histogram(a).values()) == len(a)


def test_overlap_histogram_counts_set_sizes():
    a = make_assigned(2, [(0, "W", 0, 1, 0, 10), (1, "R", 0, 1, 2, 3), (1, "R", 0, 1, 20, 21)])
    assert overlap_histogram(a) == {0: 1, 1: 2}
