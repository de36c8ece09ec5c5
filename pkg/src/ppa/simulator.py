"""Generate SC-legal executions with ground-truth performed times, sample
partial observations, and inject classified faults."""
from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, replace
from typing import Optional

from .trace_model import (
    FORMAT_VERSION,
    Kind,
    Operation,
    Trace,
    TraceFormatError,
    header_line,
    parse_record,
    record_line,
)

TRUTH_FORMAT = "ppa-truth"


@dataclass(frozen=True)
class SimConfig:
    num_procs: int = 2
    ops_per_proc: int = 8
    num_addrs: int = 2
    max_pending_len: int = 8
    min_pending_len: int = 0
    # per-processor gap between consecutive performed times, in raw ticks
    gap_min: int = 1
    gap_max: int = 4
    write_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("num_procs", "ops_per_proc", "num_addrs", "max_pending_len", "gap_min", "gap_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0 <= self.min_pending_len <= self.max_pending_len:
            raise ValueError("need 0 <= min_pending_len <= max_pending_len")
        if self.gap_min > self.gap_max:
            raise ValueError("need gap_min <= gap_max")
        if not 0.0 <= self.write_prob <= 1.0:
            raise ValueError("write_prob must lie in [0, 1]")


@dataclass(frozen=True)
class AnnotatedOperation:
    op: Operation
    performed: int


@dataclass(frozen=True)
class AnnotatedTrace:
    num_procs: int
    ops: tuple[AnnotatedOperation, ...]

    @property
    def trace(self) -> Trace:
        return Trace(self.num_procs, tuple(a.op for a in self.ops))

    @property
    def performed(self) -> dict[int, int]:
        return {a.op.id: a.performed for a in self.ops}

    def by_id(self) -> dict[int, AnnotatedOperation]:
        return {a.op.id: a for a in self.ops}

    def __len__(self) -> int:
        return len(self.ops)


class FaultKind(enum.Enum):
    STALE_READ = "stale-read"
    REORDER_PO = "reorder-po"
    LOST_WRITE = "lost-write"
    BAD_PERIOD = "bad-period"


@dataclass(frozen=True)
class FaultDescriptor:
    kind: FaultKind
    op_ids: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind.value, "op_ids": list(self.op_ids)}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "FaultDescriptor":
        rec = json.loads(text)
        return cls(FaultKind(rec["kind"]), tuple(rec["op_ids"]))


class TraceTooSmall(ValueError):
    """The trace has no site able to host the requested fault."""


def generate_execution(config: SimConfig) -> AnnotatedTrace:
    """Produce an SC-legal execution.

    Performed times are distinct across the whole trace (raw tick times
    ``num_procs`` plus the processor index) and strictly increase along each
    processor. Starts and ends are non-decreasing per processor and every
    period is at most ``max_pending_len`` long. Writes store globally unique
    values starting from 1, so every read identifies its source.
    """
    rng = random.Random(config.seed)
    p = config.num_procs
    slots = []  # (performed, proc, idx)
    for proc in range(p):
        raw = 0
        for idx in range(config.ops_per_proc):
            raw += rng.randint(config.gap_min, config.gap_max)
            slots.append((raw * p + proc, proc, idx))

    periods: dict[tuple[int, int], tuple[int, int]] = {}
    for proc in range(p):
        prev_start, prev_end = 0, 0
        for performed, _, idx in sorted(s for s in slots if s[1] == proc):
            length = rng.randint(config.min_pending_len, config.max_pending_len)
            before = rng.randint(0, length)
            start = max(prev_start, performed - before, 0)
            end = max(prev_end, performed + (length - before))
            periods[proc, idx] = (start, end)
            prev_start, prev_end = start, end

    kinds: dict[tuple[int, int], tuple[Kind, int]] = {}
    for proc in range(p):
        for idx in range(config.ops_per_proc):
            kind = Kind.WRITE if rng.random() < config.write_prob else Kind.READ
            kinds[proc, idx] = (kind, rng.randrange(config.num_addrs))

    memory: dict[int, int] = {}
    next_value = 1
    values: dict[tuple[int, int], int] = {}
    for performed, proc, idx in sorted(slots):
        kind, addr = kinds[proc, idx]
        if kind is Kind.WRITE:
            memory[addr] = next_value
            values[proc, idx] = next_value
            next_value += 1
        else:
            values[proc, idx] = memory.get(addr, 0)

    performed_at = {(proc, idx): t for t, proc, idx in slots}
    ops = []
    for proc in range(p):
        for idx in range(config.ops_per_proc):
            kind, addr = kinds[proc, idx]
            start, end = periods[proc, idx]
            op = Operation(
                id=proc * config.ops_per_proc + idx, proc=proc, idx=idx, kind=kind,
                addr=addr, value=values[proc, idx], start=start, end=end,
            )
            ops.append(AnnotatedOperation(op, performed_at[proc, idx]))
    return AnnotatedTrace(p, tuple(ops))


def sample_observations(annotated: AnnotatedTrace, m: int) -> Trace:
    """Keep timestamps on every m-th op of each processor plus its first and last op."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    last_idx: dict[int, int] = {}
    for a in annotated.ops:
        last_idx[a.op.proc] = max(last_idx.get(a.op.proc, -1), a.op.idx)
    ops = []
    for a in annotated.ops:
        op = a.op
        if not (op.idx % m == 0 or op.idx == last_idx[op.proc]):
            op = replace(op, start=None, end=None)
        ops.append(op)
    return Trace(annotated.num_procs, tuple(ops))


def legality_violations(annotated: AnnotatedTrace, periods: Optional[dict[int, tuple[int, int]]] = None) -> list[int]:
    """Ops whose ground-truth performed time lies outside their (reported) period."""
    bad = []
    for a in annotated.ops:
        start, end = periods[a.op.id] if periods is not None else (a.op.start, a.op.end)
        if not start <= a.performed <= end:
            bad.append(a.op.id)
    return bad


# -- fault injection --------------------------------------------------------

def _by_performed(annotated: AnnotatedTrace) -> list[AnnotatedOperation]:
    return sorted(annotated.ops, key=lambda a: a.performed)


def _before(x: Operation, y: Operation) -> bool:
    """x is forced before y in every admissible linearization (PO or period order)."""
    if x.proc == y.proc:
        return x.idx < y.idx
    return x.end < y.start


def _sources(annotated: AnnotatedTrace) -> dict[int, Optional[int]]:
    """Map each read to the write it observed under the ground-truth order."""
    last: dict[int, int] = {}
    src: dict[int, Optional[int]] = {}
    for a in _by_performed(annotated):
        if a.op.is_write:
            last[a.op.addr] = a.op.id
        else:
            src[a.op.id] = last.get(a.op.addr)
    return src


def _with(annotated: AnnotatedTrace, updates: dict[int, AnnotatedOperation]) -> AnnotatedTrace:
    return AnnotatedTrace(annotated.num_procs, tuple(updates.get(a.op.id, a) for a in annotated.ops))


def _inject_stale_read(annotated, rng):
    ops = annotated.by_id()
    order = _by_performed(annotated)
    sites = []
    for r in (a.op for a in order if a.op.is_read):
        writes = [a.op for a in order if a.op.is_write and a.op.addr == r.addr]
        for w1, w2 in zip(writes, writes[1:]):
            if _before(w1, w2) and w1.end < r.start and w2.end < r.start:
                sites.append((r, w1, w2))
    if not sites:
        raise TraceTooSmall("no read with two physically earlier writes to its address")
    r, w1, w2 = rng.choice(sites)
    mutated = replace(ops[r.id], op=replace(r, value=w1.value))
    return _with(annotated, {r.id: mutated}), (r.id, w1.id, w2.id)


def _inject_reorder_po(annotated, rng):
    by_proc: dict[int, list[AnnotatedOperation]] = {}
    for a in annotated.ops:
        by_proc.setdefault(a.op.proc, []).append(a)
    pairs = []
    for seq in by_proc.values():
        seq.sort(key=lambda a: a.op.idx)
        for x, y in zip(seq, seq[1:]):
            if x.op.is_read and y.op.is_write and x.op.addr == y.op.addr:
                pairs.append((x, y))
    rng.shuffle(pairs)
    for x, y in pairs:
        swapped = _with(annotated, {
            x.op.id: replace(x, performed=y.performed),
            y.op.id: replace(y, performed=x.performed),
        })
        recomputed = _recompute_reads(swapped)
        # the read now observes a write that follows it in program order
        if recomputed.by_id()[x.op.id].op.value == y.op.value:
            return recomputed, (x.op.id, y.op.id)
    raise TraceTooSmall("no read followed by a same-address write on one processor")


def _recompute_reads(annotated: AnnotatedTrace) -> AnnotatedTrace:
    memory: dict[int, int] = {}
    updates = {}
    for a in _by_performed(annotated):
        if a.op.is_write:
            memory[a.op.addr] = a.op.value
        else:
            updates[a.op.id] = replace(a, op=replace(a.op, value=memory.get(a.op.addr, 0)))
    return _with(annotated, updates)


def _inject_lost_write(annotated, rng):
    ops = annotated.by_id()
    src = _sources(annotated)
    order = _by_performed(annotated)
    candidates = []
    for w in (a.op for a in order if a.op.is_write):
        prior = [a.op for a in order if a.op.is_write and a.op.addr == w.addr and a.performed < ops[w.id].performed]
        w0 = prior[-1] if prior else None
        readers = [ops[r].op for r, s in src.items() if s == w.id]
        if w0 is not None and not _before(w0, w):
            continue
        forced = [r for r in readers if _before(w, r)]
        if forced:
            candidates.append((w, w0, readers, forced))
    if not candidates:
        raise TraceTooSmall("no write with a reader forced after it")
    w, w0, readers, forced = rng.choice(candidates)
    stale = w0.value if w0 is not None else 0
    updates = {r.id: replace(ops[r.id], op=replace(r, value=stale)) for r in readers}
    implicated = (w.id,) + tuple(r.id for r in readers) + ((w0.id,) if w0 is not None else ())
    return _with(annotated, updates), implicated


def _inject_bad_period(annotated, rng):
    candidates = [a for a in annotated.ops if a.op.start < a.performed or a.performed < a.op.end]
    if not candidates:
        raise TraceTooSmall("every pending period is a single tick")
    a = rng.choice(candidates)
    if a.op.start < a.performed:
        op = replace(a.op, end=a.performed - 1)
    else:
        op = replace(a.op, start=a.performed + 1)
    return _with(annotated, {a.op.id: replace(a, op=op)}), (a.op.id,)


_INJECTORS = {
    FaultKind.STALE_READ: _inject_stale_read,
    FaultKind.REORDER_PO: _inject_reorder_po,
    FaultKind.LOST_WRITE: _inject_lost_write,
    FaultKind.BAD_PERIOD: _inject_bad_period,
}


def inject_fault(annotated: AnnotatedTrace, kind: FaultKind, seed: int = 0) -> tuple[AnnotatedTrace, FaultDescriptor]:
    """Mutate values or timestamps so that the trace is no longer SC-legal
    (or, for BAD_PERIOD, so that one period excludes its performed time).

    Only sites whose illegality follows from processor order and disjoint
    periods alone are chosen, so the guarantee holds for every linearization.
    Raises :class:`TraceTooSmall` when no such site exists.
    """
    rng = random.Random(seed)
    mutated, implicated = _INJECTORS[kind](annotated, rng)
    return mutated, FaultDescriptor(kind, tuple(implicated))


# -- ground-truth sidecar ---------------------------------------------------

def serialize_annotated(annotated: AnnotatedTrace) -> bytes:
    lines = [header_line(annotated.num_procs, TRUTH_FORMAT)]
    for a in sorted(annotated.ops, key=lambda a: (a.op.proc, a.op.idx)):
        lines.append(record_line(a.op, performed=a.performed))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_annotated(data: bytes | str) -> AnnotatedTrace:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = [ln for ln in data.splitlines() if ln.strip()]
    if not lines:
        raise TraceFormatError("missing header", 1)
    header = json.loads(lines[0])
    if header.get("format") != TRUTH_FORMAT or header.get("version") != FORMAT_VERSION:
        raise TraceFormatError(f"header must declare format {TRUTH_FORMAT!r}", 1)
    ops = []
    for lineno, text in enumerate(lines[1:], start=2):
        op, extra = parse_record(text, lineno, extra=("performed",))
        ops.append(AnnotatedOperation(op, extra["performed"]))
    return AnnotatedTrace(header["procs"], tuple(ops))
