"""Exhaustive ground truth for small traces.

Linearizations are generated by brute force over processor interleavings;
a prefix is discarded as soon as a newly placed op ends before some
already-placed op starts. No frontier machinery is shared with the search.
"""
from __future__ import annotations

from typing import Iterator

from .frontier import Verdict
from .pending_period import AssignedTrace

DEFAULT_CAP = 14


class OracleCapExceeded(ValueError):
    pass


def _check_cap(assigned: AssignedTrace, cap: int) -> None:
    if len(assigned) > cap:
        raise OracleCapExceeded(f"trace has {len(assigned)} ops, oracle cap is {cap}")


def enumerate_linearizations(assigned: AssignedTrace, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """Every total order respecting processor order and physical time order, once each."""
    _check_cap(assigned, cap)
    seqs = [list(ids) for ids in assigned.proc_ids]
    n = len(assigned)
    pos = [0] * len(seqs)
    prefix: list[int] = []

    def rec():
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for proc, seq in enumerate(seqs):
            if pos[proc] == len(seq):
                continue
            op = seq[pos[proc]]
            end = assigned.end(op)
            if any(end < assigned.start(prev) for prev in prefix):
                continue
            prefix.append(op)
            pos[proc] += 1
            yield from rec()
            pos[proc] -= 1
            prefix.pop()

    yield from rec()


def reads_satisfied(assigned: AssignedTrace, order) -> bool:
    memory: dict[int, int] = {}
    for op_id in order:
        op = assigned[op_id]
        if op.is_write:
            memory[op.addr] = op.value
        elif memory.get(op.addr, 0) != op.value:
            return False
    return True


def oracle_verify_sc(assigned: AssignedTrace, cap: int = DEFAULT_CAP) -> Verdict:
    count = 0
    for lin in enumerate_linearizations(assigned, cap):
        count += 1
        if reads_satisfied(assigned, lin):
            return Verdict(True, witness=lin, stats={"linearizations": count})
    return Verdict(False, exhausted=True, stats={"linearizations": count})


def _positions(assigned: AssignedTrace, cap: int) -> list[dict[int, int]]:
    return [{op: i for i, op in enumerate(lin)} for lin in enumerate_linearizations(assigned, cap)]


def oracle_mhb(assigned: AssignedTrace, u: int, v: int, cap: int = DEFAULT_CAP) -> bool:
    """``u`` precedes ``v`` in every linearization (vacuously true if none)."""
    return all(pos[u] < pos[v] for pos in _positions(assigned, cap))


def oracle_chb(assigned: AssignedTrace, u: int, v: int, cap: int = DEFAULT_CAP) -> bool:
    return any(pos[u] < pos[v] for pos in _positions(assigned, cap))


def oracle_order_table(assigned: AssignedTrace, cap: int = DEFAULT_CAP) -> dict[tuple[int, int], tuple[bool, bool]]:
    """``(mhb, chb)`` for every ordered pair of distinct ops, from one enumeration."""
    ids = [op.id for op in assigned.ops]
    before_all = {(a, b): True for a in ids for b in ids if a != b}
    before_some = {(a, b): False for a in ids for b in ids if a != b}
    for pos in _positions(assigned, cap):
        for key in before_all:
            if pos[key[0]] < pos[key[1]]:
                before_some[key] = True
            else:
                before_all[key] = False
    return {key: (before_all[key], before_some[key]) for key in before_all}
