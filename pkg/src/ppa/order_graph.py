"""Execution graph over processor order, execution order and (implicit)
physical time order, with localized acyclicity checking.

Physical time order edges are never materialized: ``u -> v`` holds whenever
``end(u) < start(v)`` and is evaluated on demand from the periods.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .pending_period import AssignedTrace, OverlapIndex


class EdgeKind(enum.Enum):
    SOURCING = "sourcing"
    READ_BEFORE_NEXT_WRITE = "read-before-next-write"
    COHERENCE = "coherence"


class NonConflictingEdge(ValueError):
    pass


@dataclass(frozen=True)
class RuleViolation:
    rule: int
    witness: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"rule": self.rule, "witness": list(self.witness)}


class TGOGraph:
    def __init__(self, assigned: AssignedTrace):
        self.assigned = assigned
        self._po_next: dict[int, int] = {}
        self._po_prev: dict[int, int] = {}
        for ids in assigned.proc_ids:
            for a, b in zip(ids, ids[1:]):
                self._po_next[a] = b
                self._po_prev[b] = a
        self._succ: dict[int, dict[int, EdgeKind]] = {op.id: {} for op in assigned.ops}
        self._pred: dict[int, dict[int, EdgeKind]] = {op.id: {} for op in assigned.ops}
        self._index: Optional[OverlapIndex] = None

    # -- structure ----------------------------------------------------------

    @property
    def po_edges(self) -> list[tuple[int, int]]:
        return sorted(self._po_next.items())

    @property
    def exec_edges(self) -> dict[tuple[int, int], EdgeKind]:
        return {(a, b): kind for a, succ in self._succ.items() for b, kind in succ.items()}

    def __contains__(self, op_id: int) -> bool:
        return op_id in self._succ

    def _require(self, op_id: int) -> None:
        if op_id not in self._succ:
            raise KeyError(f"unknown op id {op_id}")

    def add_exec_edge(self, a: int, b: int, kind: EdgeKind) -> None:
        self._require(a)
        self._require(b)
        x, y = self.assigned[a], self.assigned[b]
        if a == b or x.addr != y.addr or not (x.is_write or y.is_write):
            raise NonConflictingEdge(f"ops {a} and {b} do not conflict")
        if b in self._succ[a]:
            raise ValueError(f"execution edge {a}->{b} already present")
        self._succ[a][b] = kind
        self._pred[b][a] = kind

    def remove_exec_edge(self, a: int, b: int) -> EdgeKind:
        self._require(a)
        self._require(b)
        if b not in self._succ[a]:
            raise KeyError(f"no execution edge {a}->{b}")
        del self._pred[b][a]
        return self._succ[a].pop(b)

    def successors(self, u: int) -> list[int]:
        """PO successor first, then execution-order successors in id order."""
        out = []
        if u in self._po_next:
            out.append(self._po_next[u])
        out.extend(sorted(self._succ[u]))
        return out

    def exec_successors(self, u: int) -> dict[int, EdgeKind]:
        return self._succ[u]

    def exec_predecessors(self, u: int) -> dict[int, EdgeKind]:
        return self._pred[u]

    # -- time order helpers -------------------------------------------------

    def t_before(self, a: int, b: int) -> bool:
        return self.assigned.periods[a][1] < self.assigned.periods[b][0]

    def overlapping(self, a: int, b: int) -> bool:
        sa, ea = self.assigned.periods[a]
        sb, eb = self.assigned.periods[b]
        return not (ea < sb or eb < sa)

    # -- checking rules -----------------------------------------------------

    def check_rule1(self, u: int) -> list[RuleViolation]:
        """Execution edges ``u -> w`` whose target lies wholly before ``u`` in time."""
        self._require(u)
        return [RuleViolation(1, (u, w)) for w in sorted(self._succ[u]) if self.t_before(w, u)]

    def rule2_search(self, u: int) -> tuple[list[RuleViolation], set[int]]:
        """BFS from ``u`` over PO/E edges through ops overlapping ``u``.

        Any edge that leaves the window towards an op ending before ``u``
        starts closes a cycle through a physical time order edge. Ops beyond
        the end of the window are not expanded: a cycle through them is
        reported when the check runs at that op instead.
        Returns the violations and the set of ops examined.
        """
        self._require(u)
        parent: dict[int, int] = {u: u}
        queue = deque([u])
        found: list[RuleViolation] = []
        reported: set[int] = set()
        while queue:
            x = queue.popleft()
            for y in self.successors(x):
                if y in parent and y != u:
                    continue
                if self.t_before(y, u):
                    # direct u ->E y is rule 1's finding
                    direct_exec = x == u and y in self._succ[u]
                    if y not in reported and not direct_exec:
                        reported.add(y)
                        found.append(RuleViolation(2, (u, y) if x == u else (u, x, y)))
                    parent.setdefault(y, x)
                    continue
                if y == u or not self.overlapping(y, u):
                    continue
                parent[y] = x
                queue.append(y)
        return found, set(parent)

    def check_rule2(self, u: int) -> list[RuleViolation]:
        return self.rule2_search(u)[0]

    def window(self, u: int) -> set[int]:
        """Ops whose period overlaps ``u``'s, ``u`` included."""
        if self._index is None:
            self._index = OverlapIndex(self.assigned)
        lo, hi = self.assigned.periods[u]
        return self._index.query(lo, hi)

    def check_rule3(self, u: int, window: Optional[Iterable[int]] = None) -> list[RuleViolation]:
        """PO/E cycles made only of ops overlapping ``u``; one shortest cycle per SCC."""
        self._require(u)
        nodes = set(window) if window is not None else set(self.window(u))
        nodes.add(u)
        out = []
        for comp in _sccs(nodes, lambda x: [y for y in self.successors(x) if y in nodes]):
            if len(comp) < 2:
                continue
            members = set(comp)
            anchor = u if u in members else min(members)
            cycle = _shortest_cycle(anchor, lambda x: [y for y in self.successors(x) if y in members])
            out.append(RuleViolation(3, tuple(cycle)))
        return out

    def check_acyclic(self, dirty_ops: Optional[Iterable[int]] = None) -> list[RuleViolation]:
        """Run rules 1-3 on ``dirty_ops`` (every op when ``None``).

        An empty list means the checked ops satisfy all three rules; in full
        mode that is equivalent to the whole graph being acyclic.
        """
        targets = sorted(self._succ) if dirty_ops is None else sorted(set(dirty_ops))
        out: list[RuleViolation] = []
        seen3: set[frozenset] = set()
        for u in targets:
            out.extend(self.check_rule1(u))
            out.extend(self.check_rule2(u))
            for v in self.check_rule3(u):
                key = frozenset(v.witness)
                if key not in seen3:
                    seen3.add(key)
                    out.append(v)
        return out

    # -- diagnostics --------------------------------------------------------

    def go_reachable(self, u: int) -> set[int]:
        """Ops reachable from ``u`` by one or more PO/E edges (unrestricted)."""
        seen: set[int] = set()
        stack = list(self.successors(u))
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(self.successors(x))
        return seen

    def time_order_conflicts(self) -> list[tuple[int, int]]:
        """Pairs ``(u, v)`` with ``v`` before ``u`` in time yet reachable from ``u``
        by PO/E edges. Empty for every graph built from a legal execution."""
        out = []
        for u in sorted(self._succ):
            for v in sorted(self.go_reachable(u)):
                if self.t_before(v, u):
                    out.append((u, v))
        return out


def build_base_graph(assigned: AssignedTrace) -> TGOGraph:
    return TGOGraph(assigned)


def execution_edges(assigned: AssignedTrace, order: Iterable[int]) -> list[tuple[int, int, EdgeKind]]:
    """Execution-order edges implied by reading ``order`` as a linearization."""
    last_write: dict[int, int] = {}
    readers: dict[int, list[int]] = {}
    edges = []
    for op_id in order:
        op = assigned[op_id]
        if op.is_read:
            if op.addr in last_write:
                edges.append((last_write[op.addr], op_id, EdgeKind.SOURCING))
            readers.setdefault(op.addr, []).append(op_id)
        else:
            if op.addr in last_write:
                edges.append((last_write[op.addr], op_id, EdgeKind.COHERENCE))
            for r in readers.pop(op.addr, []):
                edges.append((r, op_id, EdgeKind.READ_BEFORE_NEXT_WRITE))
            last_write[op.addr] = op_id
    return edges


def graph_from_linearization(assigned: AssignedTrace, order: Iterable[int]) -> TGOGraph:
    graph = TGOGraph(assigned)
    for a, b, kind in execution_edges(assigned, order):
        graph.add_exec_edge(a, b, kind)
    return graph


def _sccs(nodes: set[int], succ) -> list[list[int]]:
    """Iterative Tarjan over the induced subgraph; components in discovery order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def _shortest_cycle(anchor: int, succ) -> list[int]:
    """Shortest cycle through ``anchor`` (BFS); assumes one exists."""
    parent: dict[int, int] = {}
    queue = deque()
    for y in succ(anchor):
        if y == anchor:
            return [anchor]
        if y not in parent:
            parent[y] = anchor
            queue.append(y)
    while queue:
        x = queue.popleft()
        for y in succ(x):
            if y == anchor:
                path = [x]
                while path[-1] != anchor:
                    path.append(parent[path[-1]])
                return path[::-1]
            if y not in parent:
                parent[y] = x
                queue.append(y)
    raise ValueError(f"no cycle through {anchor}")
