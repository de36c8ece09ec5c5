"""Pending periods: inference for unobserved operations, physical time order,
and an overlap index over the completed periods."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .trace_model import Operation, Trace, validate_trace


class Provenance(enum.Enum):
    OBSERVED = "observed"
    INFERRED = "inferred"


class UnassignableTrace(ValueError):
    pass


@dataclass(frozen=True)
class AssignedTrace:
    """A trace in which every operation carries a pending period.

    ``periods`` maps op id to ``(start, end)`` ticks.
    """

    trace: Trace
    periods: dict[int, tuple[int, int]]
    provenance: dict[int, Provenance]

    def __hash__(self):
        return hash(self.trace)

    @property
    def num_procs(self) -> int:
        return self.trace.num_procs

    @property
    def ops(self) -> tuple[Operation, ...]:
        return self.trace.ops

    def __len__(self) -> int:
        return len(self.trace)

    def __getitem__(self, op_id: int) -> Operation:
        return self.trace[op_id]

    def start(self, op_id: int) -> int:
        return self.periods[op_id][0]

    def end(self, op_id: int) -> int:
        return self.periods[op_id][1]

    @cached_property
    def proc_ids(self) -> tuple[tuple[int, ...], ...]:
        """Op ids per processor in program order."""
        return tuple(tuple(op.id for op in ops) for ops in self.trace.by_proc)

    @classmethod
    def from_periods(cls, trace: Trace, periods: dict[int, tuple[int, int]]) -> "AssignedTrace":
        """Wrap explicit periods (every op treated as observed)."""
        return cls(trace, dict(periods), {op.id: Provenance.OBSERVED for op in trace.ops})


def assign_pending_periods(trace: Trace) -> AssignedTrace:
    """Complete a partially observed trace.

    An unobserved op starts where its nearest observed predecessor in
    processor order starts, and ends where its nearest observed successor
    ends.
    """
    report = validate_trace(trace)
    if not report.ok:
        code, message, _ = report.issues[0]
        raise UnassignableTrace(f"{code}: {message}")
    periods: dict[int, tuple[int, int]] = {}
    provenance: dict[int, Provenance] = {}
    for ops in trace.by_proc:
        # forward pass for starts, backward pass for ends
        starts: list[int] = []
        last_start = None
        for op in ops:
            if op.observed:
                last_start = op.start
            starts.append(last_start)
        ends: list[int] = [0] * len(ops)
        next_end = None
        for i in range(len(ops) - 1, -1, -1):
            if ops[i].observed:
                next_end = ops[i].end
            ends[i] = next_end
        for op, s, e in zip(ops, starts, ends):
            periods[op.id] = (s, e)
            provenance[op.id] = Provenance.OBSERVED if op.observed else Provenance.INFERRED
    return AssignedTrace(trace, periods, provenance)


def physically_before(assigned: AssignedTrace, u: int, v: int) -> bool:
    """True iff the period of ``u`` ends strictly before that of ``v`` starts."""
    if u not in assigned.periods or v not in assigned.periods:
        raise KeyError(f"unknown op id {u if u not in assigned.periods else v}")
    return assigned.periods[u][1] < assigned.periods[v][0]


def overlaps(assigned: AssignedTrace, u: int, v: int) -> bool:
    su, eu = assigned.periods[u]
    sv, ev = assigned.periods[v]
    return not (eu < sv or ev < su)


class OverlapIndex:
    """Per-processor start-sorted arrays answering interval intersection queries."""

    def __init__(self, assigned: AssignedTrace):
        self.assigned = assigned
        self._ids: list[np.ndarray] = []
        self._starts: list[np.ndarray] = []
        self._ends: list[np.ndarray] = []
        for ids in assigned.proc_ids:
            order = sorted(ids, key=lambda i: (assigned.start(i), i))
            self._ids.append(np.array(order, dtype=np.int64))
            self._starts.append(np.array([assigned.start(i) for i in order], dtype=np.uint64))
            self._ends.append(np.array([assigned.end(i) for i in order], dtype=np.uint64))

    def query_proc(self, proc: int, lo: int, hi: int) -> np.ndarray:
        """Ids on ``proc`` whose period intersects ``[lo, hi]``."""
        starts = self._starts[proc]
        k = int(np.searchsorted(starts, np.uint64(hi), side="right"))
        mask = self._ends[proc][:k] >= np.uint64(lo)
        return self._ids[proc][:k][mask]

    def query(self, lo: int, hi: int) -> set[int]:
        out: set[int] = set()
        for proc in range(len(self._ids)):
            out.update(int(i) for i in self.query_proc(proc, lo, hi))
        return out

    def overlap_set(self, u: int) -> set[int]:
        if u not in self.assigned.periods:
            raise KeyError(f"unknown op id {u}")
        lo, hi = self.assigned.periods[u]
        found = self.query(lo, hi)
        found.discard(u)
        return found

    def count_per_proc(self, u: int) -> list[int]:
        lo, hi = self.assigned.periods[u]
        counts = [len(self.query_proc(j, lo, hi)) for j in range(len(self._ids))]
        counts[self.assigned[u].proc] -= 1
        return counts


def overlap_set(index: OverlapIndex, u: int) -> set[int]:
    return index.overlap_set(u)


def measure_C(assigned: AssignedTrace, index: OverlapIndex | None = None) -> int:
    """Largest number of ops on a single processor overlapping any one op (self excluded)."""
    if len(assigned) == 0:
        return 0
    index = index or OverlapIndex(assigned)
    return max(max(index.count_per_proc(op.id)) for op in assigned.ops)


def overlap_histogram(assigned: AssignedTrace, index: OverlapIndex | None = None) -> dict[int, int]:
    """How many ops have each overlap-set size."""
    index = index or OverlapIndex(assigned)
    hist: dict[int, int] = {}
    for op in assigned.ops:
        k = len(index.overlap_set(op.id))
        hist[k] = hist.get(k, 0) + 1
    return dict(sorted(hist.items()))
