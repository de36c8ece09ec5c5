import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppa.simulator import SimConfig, generate_execution, sample_observations
from ppa.trace_model import (
    Kind,
    Operation,
    Trace,
    TraceFormatError,
    parse_trace,
    serialize_trace,
    validate_trace,
)

from .conftest import make_trace

HEADER = '{"format":"ppa-trace","version":1,"procs":%d}'


def test_header_only_stream_gives_empty_trace():
    t = parse_trace((HEADER % 3 + "\n").encode())
    assert t.num_procs == 3
    assert len(t) == 0


def test_minimal_two_op_trace_in_idx_order():
    lines = [
        HEADER % 1,
        '{"id":1,"proc":0,"idx":1,"kind":"R","addr":1,"value":5,"start":3,"end":4}',
        '{"id":0,"proc":0,"idx":0,"kind":"W","addr":1,"value":5,"start":0,"end":2}',
    ]
    t = parse_trace("\n".join(lines).encode())
    assert [op.id for op in t.by_proc[0]] == [0, 1]
    assert t[0] == Operation(0, 0, 0, Kind.WRITE, 1, 5, 0, 2)
    assert validate_trace(t).ok


def test_idx_gap_reported_by_validator():
    lines = [
        HEADER % 1,
        '{"id":0,"proc":0,"idx":0,"kind":"W","addr":1,"value":5,"start":0,"end":2}',
        '{"id":1,"proc":0,"idx":2,"kind":"R","addr":1,"value":5,"start":3,"end":4}',
    ]
    report = validate_trace(parse_trace("\n".join(lines)))
    assert not report.ok
    assert "non-contiguous idx" in report.codes()


@pytest.mark.parametrize("line, fragment", [
    ('{"id":0,"proc":0,"idx":0,"kind":"X","addr":1,"value":5,"start":0,"end":2}', "kind"),
    ('{"id":0,"proc":0,"idx":0,"kind":"W","addr":1,"value":5,"start":0}', "missing"),
    ('{"id":0,"proc":0,"idx":0,"kind":"W","addr":-1,"value":5,"start":0,"end":2}', "out of range"),
    ('{"id":0,"proc":3,"idx":0,"kind":"W","addr":1,"value":5,"start":0,"end":2}', "outside"),
    ('not json', "malformed"),
])
def test_malformed_record_reports_line(line, fragment):
    with pytest.raises(TraceFormatError) as exc:
        parse_trace(HEADER % 1 + "\n" + line)
    assert exc.value.line == 2
    assert fragment in str(exc.value)


def test_duplicate_id_and_slot_rejected():
    a = '{"id":0,"proc":0,"idx":0,"kind":"W","addr":1,"value":5,"start":0,"end":2}'
    b = '{"id":0,"proc":0,"idx":1,"kind":"W","addr":1,"value":5,"start":0,"end":2}'
    c = '{"id":1,"proc":0,"idx":0,"kind":"W","addr":1,"value":5,"start":0,"end":2}'
    with pytest.raises(TraceFormatError, match="duplicate id"):
        parse_trace("\n".join([HEADER % 1, a, b]))
    with pytest.raises(TraceFormatError, match="duplicate"):
        parse_trace("\n".join([HEADER % 1, a, c]))


def test_missing_header_rejected():
    with pytest.raises(TraceFormatError):
        parse_trace(b"")
    with pytest.raises(TraceFormatError):
        parse_trace('{"format":"other","version":1,"procs":1}')


def test_serialize_field_order_and_nulls():
    t = make_trace(2, [(0, "W", 16, 7, 10, 14), (1, "R", 16, 7, None, None)])
    lines = serialize_trace(t).decode().splitlines()
    assert lines[0] == HEADER % 2
    assert lines[1] == '{"id":0,"proc":0,"idx":0,"kind":"W","addr":16,"value":7,"start":10,"end":14}'
    assert json.loads(lines[2])["start"] is None
    assert list(json.loads(lines[2])) == ["id", "proc", "idx", "kind", "addr", "value", "start", "end"]


def test_empty_trace_serializes_to_header_only():
    assert serialize_trace(Trace(2, ())).decode().splitlines() == [HEADER % 2]


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("m", [1, 3])
def test_simulator_output_round_trips_and_validates(seed, m):
    t = sample_observations(generate_execution(SimConfig(num_procs=3, ops_per_proc=7, seed=seed)), m)
    assert validate_trace(t).ok
    assert parse_trace(serialize_trace(t)) == t


def test_unobserved_boundary_op_reported():
    t = make_trace(2, [(0, "W", 0, 1, 0, 2), (1, "R", 0, 1, 0, 5), (1, "R", 0, 1, None, None)])
    report = validate_trace(t)
    assert "boundary op unobserved" in report.codes()
    assert any(2 in ops for code, _, ops in report.issues if code == "boundary op unobserved")


def test_start_after_end_reported():
    report = validate_trace(make_trace(1, [(0, "W", 0, 1, 5, 3)]))
    assert report.codes() == {"start exceeds end"}


def test_half_observed_reported():
    report = validate_trace(make_trace(1, [(0, "W", 0, 1, 5, None)]))
    assert "half observed" in report.codes()


ticks = st.one_of(st.none(), st.integers(0, 50))
records = st.lists(
    st.tuples(st.integers(0, 3), st.integers(0, 6), st.sampled_from(list(Kind)), st.integers(0, 3),
              st.integers(0, 9), ticks, ticks),
    max_size=12,
)


@settings(max_examples=200, deadline=None)
@given(records)
def test_validate_is_total_and_round_trip_holds(recs):
    ops = tuple(Operation(i, *rec) for i, rec in enumerate(recs))
    t = Trace(4, ops)
    report = validate_trace(t)
    assert report.ok == (not report.issues)
    slots = {(op.proc, op.idx) for op in ops}
    if len(slots) == len(ops):
        assert parse_trace(serialize_trace(t)) == t
