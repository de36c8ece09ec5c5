"""How big does the frontier graph get, and how long does verification take,
as traces grow? Saves frontier_scaling.png when matplotlib is available."""
import sys
import time

import numpy as np

from ppa import SimConfig, assign_pending_periods, build_frontier_graph, generate_execution, measure_C, verify_sc

sizes = np.array([100, 200, 400, 800, 1600])
nodes, seconds, unpruned = [], [], []
for n in sizes:
    execution = generate_execution(SimConfig(num_procs=2, ops_per_proc=int(n) // 2, max_pending_len=8, seed=1))
    assigned = assign_pending_periods(execution.trace)
    graph = build_frontier_graph(assigned)
    t0 = time.perf_counter()
    verify_sc(assigned)
    seconds.append(time.perf_counter() - t0)
    nodes.append(graph.num_nodes)
    unpruned.append((n // 2 + 1) ** 2)  # every count vector on two processors
    print(f"n={n:>5}  C={measure_C(assigned)}  frontiers={graph.num_nodes:>6}  "
          f"without pruning={unpruned[-1]:>8}  verify={seconds[-1]:.3f}s")

slope, icept = np.polyfit(sizes, nodes, 1)
print(f"\nfrontiers ~ {slope:.2f} n + {icept:.1f}")
print(f"verify time log-log slope {np.polyfit(np.log(sizes), np.log(seconds), 1)[0]:.2f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(0)

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
left.loglog(sizes, unpruned, "o--", label="all count vectors")
left.loglog(sizes, nodes, "o-", label="feasible frontiers")
left.set_xlabel("ops")
left.legend()
right.loglog(sizes, seconds, "o-")
right.set_xlabel("ops")
right.set_ylabel("verify seconds")
fig.tight_layout()
fig.savefig("frontier_scaling.png", dpi=120)
print("wrote frontier_scaling.png")
