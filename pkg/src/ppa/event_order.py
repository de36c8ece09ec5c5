"""Must-have / could-have happened-before as reachability on the frontier graph.

A path from the starting to the terminating frontier is one candidate
execution. ``u`` happens before ``v`` on a path iff the path visits a
frontier in which ``u`` has been appended while ``v`` has not.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .frontier import FrontierGraph


class SameProcessorQuery(ValueError):
    pass


@dataclass(frozen=True)
class OrderAnswer:
    mhb: bool
    chb: bool
    path: Optional[tuple[int, ...]] = None  # advancing ops along one qualifying path
    cut_size: Optional[int] = None
    # node plus edge visits spent on each relation
    mhb_visits: int = 0
    chb_visits: int = 0

    def to_dict(self) -> dict:
        witness: dict = {}
        if self.cut_size is not None:
            witness["cut_size"] = self.cut_size
        if self.path is not None:
            witness["path"] = list(self.path)
        return {"mhb": self.mhb, "chb": self.chb, "witness": witness}


def _locate(graph: FrontierGraph, u: int, v: int):
    a, b = graph.assigned[u], graph.assigned[v]
    if a.proc == b.proc:
        raise SameProcessorQuery(f"ops {u} and {v} are both on processor {a.proc}")
    return a, b


def qualifying_frontiers(graph: FrontierGraph, u: int, v: int) -> set[int]:
    """Node indices where ``u`` is appended and ``v`` is not yet."""
    a, b = _locate(graph, u, v)
    return {i for i, f in enumerate(graph.nodes) if f[a.proc] > a.idx and f[b.proc] <= b.idx}


def _reach(adj, source: int, blocked: set[int]) -> tuple[set[int], dict[int, int], int]:
    """BFS; returns (reached, parent-by-node, visits)."""
    seen = {source}
    parent: dict[int, int] = {}
    queue = deque([source])
    visits = 0
    while queue:
        x = queue.popleft()
        visits += 1
        for y, _ in adj[x]:
            visits += 1
            if y in seen or y in blocked:
                continue
            seen.add(y)
            parent[y] = x
            queue.append(y)
    return seen, parent, visits


def must_happen_before(graph: FrontierGraph, u: int, v: int) -> bool:
    return order_query(graph, u, v).mhb


def could_happen_before(graph: FrontierGraph, u: int, v: int) -> bool:
    return order_query(graph, u, v).chb


def _op_between(graph: FrontierGraph, i: int, j: int) -> int:
    for k, op in graph.succ[i]:
        if k == j:
            return op
    raise AssertionError("missing frontier edge")


def order_query(graph: FrontierGraph, u: int, v: int) -> OrderAnswer:
    """Answer both relations with three linear passes over the graph.

    MHB: the qualifying frontiers separate start from end. CHB: some
    qualifying frontier is reachable from start and reaches end.
    """
    qual = qualifying_frontiers(graph, u, v)
    if graph.end is None:
        # no complete candidate execution at all
        return OrderAnswer(mhb=True, chb=False, cut_size=len(qual))

    reached, _, mhb_visits = _reach(graph.succ, graph.start, qual)
    mhb = graph.end not in reached

    fwd, fparent, v1 = _reach(graph.succ, graph.start, set())
    bwd, bparent, v2 = _reach(graph.pred, graph.end, set())
    hits = sorted(i for i in qual if i in fwd and i in bwd)
    chb = bool(hits)

    path = None
    if chb:
        f = hits[0]
        ops: list[int] = []
        x = f
        while x != graph.start:
            ops.append(_op_between(graph, fparent[x], x))
            x = fparent[x]
        ops.reverse()
        x = f
        while x != graph.end:
            ops.append(_op_between(graph, x, bparent[x]))
            x = bparent[x]
        path = tuple(ops)
    return OrderAnswer(mhb=mhb, chb=chb, path=path, cut_size=len(qual) if mhb else None,
                       mhb_visits=mhb_visits, chb_visits=v1 + v2)
