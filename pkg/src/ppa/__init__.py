"""Sequential-consistency verification and event ordering for
shared-memory traces annotated with pending periods."""
from .event_order import OrderAnswer, could_happen_before, must_happen_before, order_query, qualifying_frontiers
from .frontier import (
    FrontierGraph,
    SearchState,
    Verdict,
    build_frontier_graph,
    feasible_successors,
    replay_check,
    verify_sc,
)
from .oracle import enumerate_linearizations, oracle_chb, oracle_mhb, oracle_verify_sc
from .order_graph import EdgeKind, RuleViolation, TGOGraph, build_base_graph
from .pending_period import (
    AssignedTrace,
    OverlapIndex,
    Provenance,
    assign_pending_periods,
    measure_C,
    overlap_set,
    physically_before,
)
from .simulator import (
    AnnotatedTrace,
    FaultDescriptor,
    FaultKind,
    SimConfig,
    generate_execution,
    inject_fault,
    legality_violations,
    sample_observations,
)
from .trace_model import Kind, Operation, Trace, parse_trace, serialize_trace, validate_trace

__version__ = "0.1.0"
