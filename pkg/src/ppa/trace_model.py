"""Operation/trace data model and the line-oriented ``ppa-trace`` file format."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

FORMAT_NAME = "ppa-trace"
FORMAT_VERSION = 1

# Largest representable tick; stands in for an unbounded end time.
MAX_TICK = 2**64 - 1

_FIELDS = ("id", "proc", "idx", "kind", "addr", "value", "start", "end")


class Kind(enum.Enum):
    READ = "R"
    WRITE = "W"


class TraceFormatError(ValueError):
    """Raised for unparseable or structurally inconsistent trace input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Operation:
    id: int
    proc: int
    idx: int
    kind: Kind
    addr: int
    value: int
    start: Optional[int] = None
    end: Optional[int] = None

    @property
    def is_write(self) -> bool:
        return self.kind is Kind.WRITE

    @property
    def is_read(self) -> bool:
        return self.kind is Kind.READ

    @property
    def observed(self) -> bool:
        return self.start is not None and self.end is not None

    def to_record(self) -> dict:
        rec = {name: getattr(self, name) for name in _FIELDS}
        rec["kind"] = self.kind.value
        return rec

    def __str__(self) -> str:
        return f"{self.kind.value}{self.id}@P{self.proc}.{self.idx}(a{self.addr}={self.value})"


@dataclass(frozen=True)
class Trace:
    """One execution: ``num_procs`` processors and their operations.

    ``ops`` is kept sorted by ``(proc, idx)`` regardless of input order.
    Construction does not enforce the structural invariants; use
    :func:`validate_trace` for that.
    """

    num_procs: int
    ops: tuple[Operation, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(sorted(self.ops, key=lambda o: (o.proc, o.idx))))

    @cached_property
    def by_id(self) -> dict[int, Operation]:
        return {op.id: op for op in self.ops}

    @cached_property
    def by_proc(self) -> tuple[tuple[Operation, ...], ...]:
        groups: list[list[Operation]] = [[] for _ in range(self.num_procs)]
        for op in self.ops:
            if 0 <= op.proc < self.num_procs:
                groups[op.proc].append(op)
        return tuple(tuple(g) for g in groups)

    def __len__(self) -> int:
        return len(self.ops)

    def __getitem__(self, op_id: int) -> Operation:
        try:
            return self.by_id[op_id]
        except KeyError:
            raise KeyError(f"unknown op id {op_id}") from None

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.num_procs == other.num_procs and self.ops == other.ops

    def __hash__(self):
        return hash((self.num_procs, self.ops))

    @property
    def addresses(self) -> set[int]:
        return {op.addr for op in self.ops}


@dataclass
class ValidationReport:
    issues: list[tuple[str, str, tuple[int, ...]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, message: str, ops: Iterable[int] = ()) -> None:
        self.issues.append((code, message, tuple(ops)))

    def codes(self) -> set[str]:
        return {code for code, _, _ in self.issues}


def _check_int(rec: dict, name: str, line: int, nullable: bool = False) -> Optional[int]:
    val = rec[name]
    if val is None and nullable:
        return None
    # bool is an int subclass; reject it explicitly
    if not isinstance(val, int) or isinstance(val, bool):
        raise TraceFormatError(f"field {name!r} must be an integer, got {val!r}", line)
    if val < 0 or val > MAX_TICK:
        raise TraceFormatError(f"field {name!r} out of range: {val}", line)
    return val


def _parse_header(text: str) -> int:
    try:
        header = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"malformed header: {exc.msg}", 1) from None
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise TraceFormatError(f"header must declare format {FORMAT_NAME!r}", 1)
    if header.get("version") != FORMAT_VERSION:
        raise TraceFormatError(f"unsupported version {header.get('version')!r}", 1)
    procs = header.get("procs")
    if not isinstance(procs, int) or isinstance(procs, bool) or procs < 1:
        raise TraceFormatError(f"'procs' must be a positive integer, got {procs!r}", 1)
    return procs


def parse_record(text: str, line: int = 0, extra: tuple[str, ...] = ()) -> tuple[Operation, dict]:
    """Parse one operation record; returns the op and any ``extra`` fields."""
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"malformed record: {exc.msg}", line) from None
    if not isinstance(rec, dict):
        raise TraceFormatError("record must be a JSON object", line)
    expected = set(_FIELDS) | set(extra)
    if set(rec) != expected:
        missing = sorted(expected - set(rec))
        unknown = sorted(set(rec) - expected)
        raise TraceFormatError(f"bad field set (missing={missing}, unknown={unknown})", line)
    kind = rec["kind"]
    if kind not in ("R", "W"):
        raise TraceFormatError(f"kind must be 'R' or 'W', got {kind!r}", line)
    op = Operation(
        id=_check_int(rec, "id", line),
        proc=_check_int(rec, "proc", line),
        idx=_check_int(rec, "idx", line),
        kind=Kind(kind),
        addr=_check_int(rec, "addr", line),
        value=_check_int(rec, "value", line),
        start=_check_int(rec, "start", line, nullable=True),
        end=_check_int(rec, "end", line, nullable=True),
    )
    return op, {name: rec[name] for name in extra}


def parse_trace(data: bytes | str) -> Trace:
    """Parse a ``ppa-trace`` stream.

    Raises :class:`TraceFormatError` on malformed records, duplicate ids,
    duplicate ``(proc, idx)`` pairs, or processors outside ``[0, procs)``.
    Gaps in idx and missing boundary observations are left to
    :func:`validate_trace`.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TraceFormatError(f"not UTF-8: {exc}") from None
    lines = data.splitlines()
    if not lines or not lines[0].strip():
        raise TraceFormatError("missing header", 1)
    procs = _parse_header(lines[0])
    ops: list[Operation] = []
    seen_ids: set[int] = set()
    seen_slots: set[tuple[int, int]] = set()
    for lineno, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        op, _ = parse_record(text, lineno)
        if op.proc >= procs:
            raise TraceFormatError(f"proc {op.proc} outside [0, {procs})", lineno)
        if op.id in seen_ids:
            raise TraceFormatError(f"duplicate id {op.id}", lineno)
        if (op.proc, op.idx) in seen_slots:
            raise TraceFormatError(f"duplicate (proc, idx) = ({op.proc}, {op.idx})", lineno)
        seen_ids.add(op.id)
        seen_slots.add((op.proc, op.idx))
        ops.append(op)
    return Trace(procs, tuple(ops))


def header_line(num_procs: int, fmt: str = FORMAT_NAME) -> str:
    return json.dumps({"format": fmt, "version": FORMAT_VERSION, "procs": num_procs}, separators=(",", ":"))


def record_line(op: Operation, **extra) -> str:
    rec = op.to_record()
    rec.update(extra)
    return json.dumps(rec, separators=(",", ":"))


def serialize_trace(trace: Trace) -> bytes:
    lines = [header_line(trace.num_procs)]
    lines.extend(record_line(op) for op in trace.ops)
    return ("\n".join(lines) + "\n").encode("utf-8")


def validate_trace(trace: Trace) -> ValidationReport:
    report = ValidationReport()
    if trace.num_procs < 1:
        report.add("bad procs", f"num_procs must be >= 1, got {trace.num_procs}")
    ids: dict[int, int] = {}
    slots: dict[tuple[int, int], int] = {}
    for op in trace.ops:
        if op.id in ids:
            report.add("duplicate id", f"id {op.id} used twice", (ids[op.id], op.id))
        ids.setdefault(op.id, op.id)
        if (op.proc, op.idx) in slots:
            report.add("duplicate slot", f"(proc, idx) = ({op.proc}, {op.idx}) used twice", (slots[op.proc, op.idx], op.id))
        slots.setdefault((op.proc, op.idx), op.id)
        if not 0 <= op.proc < trace.num_procs:
            report.add("proc out of range", f"op {op.id} on proc {op.proc}", (op.id,))
        if (op.start is None) != (op.end is None):
            report.add("half observed", f"op {op.id} has only one of start/end", (op.id,))
        if op.start is not None and op.end is not None and op.start > op.end:
            report.add("start exceeds end", f"op {op.id}: start {op.start} > end {op.end}", (op.id,))

    for proc, ops in enumerate(trace.by_proc):
        for expect, op in enumerate(ops):
            if op.idx != expect:
                report.add("non-contiguous idx", f"proc {proc}: expected idx {expect}, found {op.idx}", (op.id,))
                break
        if ops:
            for boundary in (ops[0],) if len(ops) == 1 else (ops[0], ops[-1]):
                if not boundary.observed:
                    report.add("boundary op unobserved", f"op {boundary.id} is first/last on proc {proc} but unobserved", (boundary.id,))
    return report
