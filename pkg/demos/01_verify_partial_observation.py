"""Walkthrough: simulate an execution, hide most timestamps, verify it,
then break it in different ways and read the certificates."""
from ppa import (
    FaultKind,
    SimConfig,
    assign_pending_periods,
    generate_execution,
    inject_fault,
    legality_violations,
    measure_C,
    sample_observations,
    verify_sc,
)

# %% A legal execution on three processors sharing two addresses.
config = SimConfig(num_procs=3, ops_per_proc=40, num_addrs=2, max_pending_len=6, seed=11)
execution = generate_execution(config)
print(f"{len(execution)} ops, every read returns the latest write by construction")

# %% Observe only some timestamps. Unobserved ops borrow their neighbours'.
for m in (1, 5, 20):
    assigned = assign_pending_periods(sample_observations(execution, m))
    verdict = verify_sc(assigned)
    widths = [e - s for s, e in assigned.periods.values()]
    print(f"m={m:>2}: C={measure_C(assigned):>2}  mean width={sum(widths) / len(widths):5.1f}  "
          f"verdict={'PASS' if verdict.passed else 'FAIL'}  nodes visited={verdict.stats['nodes_visited']}")
    # the inferred periods still contain every true performed time
    assert legality_violations(execution, assigned.periods) == []

# %% Faults. The first three break SC; the last one breaks the timestamps.
for kind in FaultKind:
    mutated, descriptor = inject_fault(execution, kind, seed=3)
    verdict = verify_sc(assign_pending_periods(mutated.trace))
    print(f"\n{kind.value}: implicated ops {list(descriptor.op_ids)}")
    if verdict.passed:
        print("  verification passes; legality monitor flags", legality_violations(mutated))
        continue
    for v in verdict.certificate[:4]:
        print(f"  rule {v.rule}: {list(v.witness)}")
