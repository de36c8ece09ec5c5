import random
from dataclasses import replace

import pytest

from ppa.pending_period import AssignedTrace, assign_pending_periods
from ppa.simulator import SimConfig, generate_execution, sample_observations
from ppa.trace_model import Kind, Operation, Trace


def make_trace(num_procs, rows):
    """rows: (proc, kind, addr, value, start, end); ids and idx assigned in row order."""
    counts = [0] * num_procs
    ops = []
    for i, (proc, kind, addr, value, start, end) in enumerate(rows):
        kind = Kind(kind) if isinstance(kind, str) else kind
        ops.append(Operation(i, proc, counts[proc], kind, addr, value, start, end))
        counts[proc] += 1
    return Trace(num_procs, tuple(ops))


def make_assigned(num_procs, rows):
    return assign_pending_periods(make_trace(num_procs, rows))


def random_periods_trace(rng, max_procs=3, max_ops=10, span=20, max_len=8, monotone=False):
    """Arbitrary periods; program order is respected by them only when ``monotone``."""
    p = rng.randint(1, max_procs)
    n = rng.randint(1, max_ops)
    rows = []
    for _ in range(n):
        s = rng.randint(0, span)
        rows.append([rng.randrange(p), rng.choice("RW"), rng.randrange(2), rng.randint(0, 2), s, s + rng.randint(0, max_len)])
    if monotone:
        for proc in range(p):
            mine = [r for r in rows if r[0] == proc]
            for r, (s, e) in zip(mine, sorted((r[4], r[5]) for r in mine)):
                r[4], r[5] = s, e
    return AssignedTrace.from_periods(make_trace(p, [tuple(r) for r in rows]), {i: (r[4], r[5]) for i, r in enumerate(rows)})


def small_corpus(count, seed=0, procs=(2, 3), max_n=12, rates=(1, 2, 4), mutate=0.5):
    """Seeded small traces, roughly half with one read value perturbed."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        p = procs[i % len(procs)]
        k = rng.randint(1, max_n // p)
        cfg = SimConfig(num_procs=p, ops_per_proc=k, num_addrs=rng.randint(1, 2),
                        max_pending_len=rng.randint(1, 10), gap_min=1, gap_max=3, seed=rng.randrange(2**31))
        ann = generate_execution(cfg)
        trace = sample_observations(ann, rates[i % len(rates)])
        if rng.random() < mutate:
            reads = [op for op in trace.ops if op.is_read]
            if reads:
                r = rng.choice(reads)
                values = sorted({0} | {op.value for op in trace.ops if op.is_write and op.addr == r.addr})
                trace = Trace(p, tuple(replace(op, value=rng.choice(values)) if op.id == r.id else op for op in trace.ops))
        out.append((ann, assign_pending_periods(trace)))
    return out


@pytest.fixture
def rng():
    return random.Random(12345)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; printed at session end."""
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
