"""Must-have and could-have happened-before on a hand-written trace."""
from ppa import build_frontier_graph, order_query
from ppa.pending_period import assign_pending_periods
from ppa.trace_model import Kind, Operation, Trace

W, R = Kind.WRITE, Kind.READ
# proc 0: x=1 early, then a long read; proc 1: a write overlapping both, then a late read
ops = (
    Operation(0, 0, 0, W, 0, 1, 0, 2),
    Operation(1, 0, 1, R, 1, 0, 3, 12),
    Operation(2, 1, 0, W, 1, 2, 1, 9),
    Operation(3, 1, 1, R, 0, 1, 14, 15),
)
assigned = assign_pending_periods(Trace(2, ops))
graph = build_frontier_graph(assigned)
print(f"{graph.num_nodes} frontiers, {graph.num_edges} edges")

for u, v in [(0, 3), (0, 2), (2, 0), (1, 2), (2, 1), (3, 0)]:
    answer = order_query(graph, u, v)
    print(f"{u} before {v}:  must={answer.mhb!s:5}  could={answer.chb!s:5}  path={answer.path}")
