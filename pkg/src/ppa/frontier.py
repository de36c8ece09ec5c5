"""Frontier graph construction and backtracking SC verification over it.

A frontier is recorded as the per-processor count of operations already
appended to the candidate linearization (0 stands for the empty marker).
An operation may be appended only when no operation still unappended ends
strictly before it starts; that single rule is what keeps the reachable
frontier space linear in the trace length.
"""
from __future__ import annotations

import time
import weakref
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .order_graph import EdgeKind, RuleViolation, TGOGraph
from .pending_period import AssignedTrace, measure_C
from .trace_model import MAX_TICK

Frontier = tuple[int, ...]

DEFAULT_FRONTIER_CAP = 200_000

# rule number used for a read whose value no cycle rule explains
READ_VALUE_RULE = 0
# marks a branch cut by the optional failed-state memo; never reported
MEMO_RULE = -1


class FrontierCapExceeded(RuntimeError):
    pass


class _Context:
    """Per-trace tables shared by the search and the explicit graph builder."""

    def __init__(self, assigned: AssignedTrace):
        self.assigned = assigned
        self.proc_ids = assigned.proc_ids
        self.p = assigned.num_procs
        self.sizes = tuple(len(ids) for ids in self.proc_ids)
        self.suffix_min_end: list[list[int]] = []
        for ids in self.proc_ids:
            mins = [MAX_TICK + 1] * (len(ids) + 1)
            for i in range(len(ids) - 1, -1, -1):
                mins[i] = min(mins[i + 1], assigned.end(ids[i]))
            self.suffix_min_end.append(mins)

    def eligible(self, counts: Frontier, proc: int) -> bool:
        c = counts[proc]
        if c >= self.sizes[proc]:
            return False
        start = self.assigned.start(self.proc_ids[proc][c])
        for j in range(self.p):
            pos = counts[j] + 1 if j == proc else counts[j]
            if self.suffix_min_end[j][pos] < start:
                return False
        return True

    def successors(self, counts: Frontier) -> list[tuple[int, Frontier]]:
        out = []
        for proc in range(self.p):
            if self.eligible(counts, proc):
                op_id = self.proc_ids[proc][counts[proc]]
                nxt = counts[:proc] + (counts[proc] + 1,) + counts[proc + 1:]
                out.append((self.assigned.end(op_id), proc, op_id, nxt))
        out.sort()
        return [(op_id, nxt) for _, _, op_id, nxt in out]


_contexts: "weakref.WeakKeyDictionary[AssignedTrace, _Context]" = weakref.WeakKeyDictionary()


def _context(assigned: AssignedTrace) -> _Context:
    ctx = _contexts.get(assigned)
    if ctx is None or ctx.assigned is not assigned:
        ctx = _Context(assigned)
        _contexts[assigned] = ctx
    return ctx


def starting_frontier(assigned: AssignedTrace) -> Frontier:
    return (0,) * assigned.num_procs


def terminating_frontier(assigned: AssignedTrace) -> Frontier:
    return tuple(len(ids) for ids in assigned.proc_ids)


def frontier_ops(assigned: AssignedTrace, frontier: Frontier) -> tuple[Optional[int], ...]:
    """Most recently appended op per processor, ``None`` for the empty marker."""
    return tuple(ids[c - 1] if c else None for ids, c in zip(assigned.proc_ids, frontier))


def feasible_successors(assigned: AssignedTrace, frontier: Frontier) -> list[tuple[int, Frontier]]:
    """``(op, next frontier)`` pairs, earliest end first, ties by processor."""
    return _context(assigned).successors(tuple(frontier))


# -- verification search ------------------------------------------------------

@dataclass
class _Undo:
    op: int
    edges: list[tuple[int, int]]
    prev_last_write: Optional[int]
    prev_readers: Optional[list[int]]


@dataclass
class _Level:
    frontier: Frontier
    branches: deque


class _Exhausted:
    def __repr__(self):
        return "EXHAUSTED"


EXHAUSTED = _Exhausted()


class SearchState:
    """Mutable state of one verification search.

    ``levels[i]`` holds the untried branches at the frontier reached after
    ``i`` appends; ``undo[i]`` reverses the ``i``-th append.
    """

    def __init__(self, assigned: AssignedTrace, memoize: bool = False):
        self.assigned = assigned
        self.ctx = _context(assigned)
        self.graph = TGOGraph(assigned)
        self.counts: Frontier = starting_frontier(assigned)
        self.order: list[int] = []
        self.last_write: dict[int, int] = {}
        self.readers: dict[int, list[int]] = {}
        self.writes: dict[int, list[int]] = {}  # appended writes per address, in order
        self.undo: list[_Undo] = []
        self.levels: list[_Level] = [self._level()]
        self.memoize = memoize
        self.dead: set = set()
        self.stats = {"nodes_visited": 0, "edges_tried": 0, "backtracks": 0}

    def _level(self) -> _Level:
        return _Level(self.counts, deque(op for op, _ in self.ctx.successors(self.counts)))

    @property
    def frontier(self) -> Frontier:
        return self.counts

    @property
    def complete(self) -> bool:
        return self.counts == terminating_frontier(self.assigned)

    def _memory_key(self):
        ops = self.assigned
        return (self.counts, tuple(sorted((a, ops[w].value) for a, w in self.last_write.items())))

    def advance(self, op_id: int) -> list[RuleViolation]:
        """Append ``op_id``; returns the violations that rejected it (state
        unchanged) or an empty list on success."""
        op = self.assigned[op_id]
        proc = op.proc
        if self.counts[proc] >= self.ctx.sizes[proc] or self.ctx.proc_ids[proc][self.counts[proc]] != op_id \
                or not self.ctx.eligible(self.counts, proc):
            raise ValueError(f"op {op_id} cannot extend frontier {self.counts}")
        self.stats["edges_tried"] += 1
        addr = op.addr
        prev = self.last_write.get(addr)
        if op.is_read:
            expected = self.assigned[prev].value if prev is not None else 0
            if op.value != expected:
                return self._diagnose_read(op_id)
            edges = [(prev, op_id, EdgeKind.SOURCING)] if prev is not None else []
        else:
            edges = [(prev, op_id, EdgeKind.COHERENCE)] if prev is not None else []
            edges += [(r, op_id, EdgeKind.READ_BEFORE_NEXT_WRITE) for r in self.readers.get(addr, [])]

        for a, b, kind in edges:
            self.graph.add_exec_edge(a, b, kind)
        old_readers = self.readers.get(addr)
        undo = _Undo(op_id, [(a, b) for a, b, _ in edges], prev, list(old_readers) if old_readers is not None else None)
        if op.is_read:
            self.readers.setdefault(addr, []).append(op_id)
        else:
            self.last_write[addr] = op_id
            self.readers[addr] = []
            self.writes.setdefault(addr, []).append(op_id)
        self.counts = self.counts[:proc] + (self.counts[proc] + 1,) + self.counts[proc + 1:]
        self.order.append(op_id)
        self.undo.append(undo)

        touched = {op_id}
        for a, b, _ in edges:
            touched.update((a, b))
        violations = self.graph.check_acyclic(touched)
        if not violations and self.memoize and self._memory_key() in self.dead:
            self._revert()
            return [RuleViolation(MEMO_RULE, (op_id,))]
        if violations:
            self._revert()
            return violations
        self.stats["nodes_visited"] += 1
        self.levels.append(self._level())
        return []

    def _revert(self) -> None:
        undo = self.undo.pop()
        op = self.assigned[undo.op]
        for a, b in undo.edges:
            self.graph.remove_exec_edge(a, b)
        if undo.prev_last_write is None:
            self.last_write.pop(op.addr, None)
        else:
            self.last_write[op.addr] = undo.prev_last_write
        if undo.prev_readers is None:
            self.readers.pop(op.addr, None)
        else:
            self.readers[op.addr] = undo.prev_readers
        if op.is_write:
            self.writes[op.addr].pop()
        self.order.pop()
        self.counts = self.counts[:op.proc] + (self.counts[op.proc] - 1,) + self.counts[op.proc + 1:]

    def backtrack(self):
        """Undo the latest append, then pick the next untried branch at the
        deepest level that still has one. Returns that op, or ``EXHAUSTED``
        once the starting frontier has no branch left."""
        if len(self.levels) > 1:
            self._pop_level(exhausted=False)
        return self.next_branch()

    def next_branch(self):
        while not self.levels[-1].branches:
            if len(self.levels) == 1:
                return EXHAUSTED
            self._pop_level()
        return self.levels[-1].branches.popleft()

    def _pop_level(self, exhausted: bool = True) -> None:
        if self.memoize and exhausted:
            self.dead.add(self._memory_key())
        self.levels.pop()
        self._revert()
        self.stats["backtracks"] += 1

    def _diagnose_read(self, r: int) -> list[RuleViolation]:
        """Explain a read-value mismatch through the checking rules.

        Each appended write carrying the read's value is tried as its source:
        the read is then ordered before that write's coherence successor,
        and the rules are evaluated on the read with those edges in place.
        """
        op = self.assigned[r]
        writes = self.writes.get(op.addr, [])
        candidates: list[Optional[int]] = [w for w in writes if self.assigned[w].value == op.value]
        if op.value == 0:
            candidates.insert(0, None)
        found: list[RuleViolation] = []
        for src in candidates:
            pos = writes.index(src) + 1 if src is not None else 0
            if pos >= len(writes):
                continue
            hyp = [(src, r, EdgeKind.SOURCING)] if src is not None else []
            hyp.append((r, writes[pos], EdgeKind.READ_BEFORE_NEXT_WRITE))
            for a, b, kind in hyp:
                self.graph.add_exec_edge(a, b, kind)
            try:
                found.extend(self.graph.check_rule1(r))
                found.extend(self.graph.check_rule2(r))
                found.extend(self.graph.check_rule3(r))
            finally:
                for a, b, _ in hyp:
                    self.graph.remove_exec_edge(a, b)
        if found:
            return found
        last = self.last_write.get(op.addr)
        return [RuleViolation(READ_VALUE_RULE, (r,) if last is None else (r, last))]

    def snapshot(self) -> tuple:
        """Comparable view of everything an advance/backtrack pair must restore."""
        return (
            self.counts,
            tuple(self.order),
            tuple(sorted(self.graph.exec_edges.items(), key=lambda kv: kv[0])),
            tuple(sorted(self.last_write.items())),
            tuple(sorted((a, tuple(rs)) for a, rs in self.readers.items() if rs)),
        )


@dataclass
class Verdict:
    passed: bool
    witness: Optional[tuple[int, ...]] = None
    certificate: list[RuleViolation] = field(default_factory=list)
    exhausted: bool = False
    stats: dict = field(default_factory=dict)

    def to_report(self) -> dict:
        rep: dict = {"verdict": "PASS" if self.passed else "FAIL"}
        if self.passed:
            rep["witness"] = list(self.witness or ())
        else:
            rep["certificate"] = {
                "violations": [v.to_dict() for v in self.certificate],
                "exhausted": self.exhausted,
            }
        rep["stats"] = dict(self.stats)
        return rep


MAX_CERTIFICATE = 16


def verify_sc(assigned: AssignedTrace, memoize: bool = True, timing: bool = False) -> Verdict:
    """Decide whether some linearization respecting processor order and
    physical time order lets every read return the latest earlier write
    to its address (0 before any write).

    PASS carries the accepting linearization; FAIL carries the violations
    met at the deepest point any branch reached.
    """
    t0 = time.perf_counter()
    stats = {"nodes_visited": 0, "edges_tried": 0, "backtracks": 0,
             "measured_C": measure_C(assigned), "elapsed_ticks": 0}

    def finish(verdict: Verdict, state: Optional[SearchState]) -> Verdict:
        if state is not None:
            stats.update(state.stats)
        if timing:
            stats["elapsed_seconds"] = round(time.perf_counter() - t0, 6)
        verdict.stats = stats
        return verdict

    # program order contradicted by the periods themselves
    base = TGOGraph(assigned).check_acyclic()
    if base:
        return finish(Verdict(False, certificate=base[:MAX_CERTIFICATE], exhausted=False), None)

    state = SearchState(assigned, memoize=memoize)
    deepest = -1
    certificate: list[RuleViolation] = []
    while not state.complete:
        stats["elapsed_ticks"] += 1
        op = state.next_branch()
        if op is EXHAUSTED:
            return finish(Verdict(False, certificate=certificate, exhausted=True), state)
        depth = len(state.order)
        violations = state.advance(op)
        if violations and depth >= deepest:
            if depth > deepest:
                deepest, certificate = depth, []
            for v in violations:
                if v.rule != MEMO_RULE and v not in certificate and len(certificate) < MAX_CERTIFICATE:
                    certificate.append(v)
    return finish(Verdict(True, witness=tuple(state.order)), state)


def replay_check(assigned: AssignedTrace, order) -> list[str]:
    """Independent re-check of a linearization; returns problems found."""
    problems = []
    order = list(order)
    if sorted(order) != sorted(op.id for op in assigned.ops):
        return ["witness is not a permutation of the trace's ops"]
    next_idx = [0] * assigned.num_procs
    memory: dict[int, int] = {}
    max_start = -1
    for op_id in order:
        op = assigned[op_id]
        if op.idx != next_idx[op.proc]:
            problems.append(f"op {op_id} out of program order")
        next_idx[op.proc] = op.idx + 1
        if assigned.end(op_id) < max_start:
            problems.append(f"op {op_id} placed after an op that starts after it ends")
        max_start = max(max_start, assigned.start(op_id))
        if op.is_write:
            memory[op.addr] = op.value
        elif memory.get(op.addr, 0) != op.value:
            problems.append(f"read {op_id} returns {op.value}, latest write holds {memory.get(op.addr, 0)}")
    return problems


# -- explicit frontier graph ------------------------------------------------

@dataclass
class FrontierGraph:
    assigned: AssignedTrace
    nodes: list[Frontier]
    index: dict[Frontier, int]
    succ: list[list[tuple[int, int]]]  # (target node, advancing op)
    pred: list[list[tuple[int, int]]]
    start: int
    end: Optional[int]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    def edges(self) -> Iterator[tuple[Frontier, Frontier, int]]:
        for i, out in enumerate(self.succ):
            for j, op in out:
                yield self.nodes[i], self.nodes[j], op


def build_frontier_graph(assigned: AssignedTrace, cap: int = DEFAULT_FRONTIER_CAP) -> FrontierGraph:
    """Enumerate every frontier reachable from the start (values ignored)."""
    ctx = _context(assigned)
    start = starting_frontier(assigned)
    nodes = [start]
    index = {start: 0}
    succ: list[list[tuple[int, int]]] = [[]]
    queue = deque([start])
    while queue:
        f = queue.popleft()
        i = index[f]
        for op_id, g in ctx.successors(f):
            j = index.get(g)
            if j is None:
                if len(nodes) >= cap:
                    raise FrontierCapExceeded(f"frontier graph exceeds {cap} nodes")
                j = index[g] = len(nodes)
                nodes.append(g)
                succ.append([])
                queue.append(g)
            succ[i].append((j, op_id))
    pred: list[list[tuple[int, int]]] = [[] for _ in nodes]
    for i, out in enumerate(succ):
        for j, op in out:
            pred[j].append((i, op))
    return FrontierGraph(assigned, nodes, index, succ, pred, 0, index.get(terminating_frontier(assigned)))
