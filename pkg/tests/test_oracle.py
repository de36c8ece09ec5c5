import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppa.oracle import (
    OracleCapExceeded,
    enumerate_linearizations,
    oracle_chb,
    oracle_mhb,
    oracle_verify_sc,
    reads_satisfied,
)

from .conftest import make_assigned, random_periods_trace


def _count(a):
    return sum(1 for _ in enumerate_linearizations(a))


def test_small_counts():
    assert _count(make_assigned(2, [(0, "W", 0, 1, 0, 5), (1, "W", 0, 2, 3, 8)])) == 2
    assert _count(make_assigned(2, [(0, "W", 0, 1, 0, 2), (1, "W", 0, 2, 5, 8)])) == 1
    assert _count(make_assigned(2, [(p, "W", 0, 1, 0, 9) for p in (0, 1) for _ in range(2)])) == 6


@pytest.mark.parametrize("sizes", [(3, 3), (4, 2), (2, 2, 2), (5, 5), (3, 2, 1, 1)])
def test_all_overlapping_count_is_multinomial(sizes):
    rows = [(p, "W", 0, 1, 0, 9) for p, k in enumerate(sizes) for _ in range(k)]
    expected = math.factorial(sum(sizes)) // math.prod(math.factorial(k) for k in sizes)
    assert _count(make_assigned(len(sizes), rows)) == expected


@settings(max_examples=120, deadline=None)
@given(st.randoms(use_true_random=False))
def test_each_linearization_valid_and_unique(r):
    a = random_periods_trace(r, max_ops=8)
    lins = list(enumerate_linearizations(a))
    assert len(lins) == len(set(lins))
    for lin in lins:
        assert sorted(lin) == sorted(op.id for op in a.ops)
        pos = {x: i for i, x in enumerate(lin)}
        for x in a.ops:
            for y in a.ops:
                if x.proc == y.proc and x.idx < y.idx:
                    assert pos[x.id] < pos[y.id]
                if a.end(x.id) < a.start(y.id):
                    assert pos[x.id] < pos[y.id]


def test_verdicts():
    ok = oracle_verify_sc(make_assigned(1, [(0, "W", 0, 1, 0, 2), (0, "R", 0, 1, 3, 4)]))
    assert ok.passed and ok.witness == (0, 1)
    bad = oracle_verify_sc(make_assigned(2, [(0, "W", 0, 2, 0, 2), (1, "R", 0, 1, 0, 4)]))
    assert not bad.passed and bad.exhausted


def test_reads_satisfied_initial_value():
    a = make_assigned(1, [(0, "R", 0, 0, 0, 1), (0, "W", 0, 3, 2, 3)])
    assert reads_satisfied(a, (0, 1))
    assert not reads_satisfied(a, (1, 0))


def test_ordering_ground_truth():
    a = make_assigned(2, [(0, "W", 0, 1, 0, 2), (0, "R", 0, 1, 3, 4), (1, "W", 1, 5, 6, 9)])
    assert oracle_mhb(a, 0, 2) and oracle_chb(a, 0, 2)
    assert oracle_mhb(a, 0, 1)
    c = make_assigned(2, [(0, "W", 0, 1, 0, 9), (1, "W", 1, 2, 0, 9)])
    for u, v in ((0, 1), (1, 0)):
        assert not oracle_mhb(c, u, v) and oracle_chb(c, u, v)


def test_cap():
    a = make_assigned(1, [(0, "W", 0, 1, i, i) for i in range(15)])
    with pytest.raises(OracleCapExceeded):
        oracle_verify_sc(a)
    assert oracle_verify_sc(a, cap=20).passed
