"""Command-line entry point: ``ppa generate|verify|query|stats``.

Exit codes: 0 pass, 1 consistency violation, 2 I/O or format error,
3 resource cap exceeded, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .event_order import order_query
from .frontier import DEFAULT_FRONTIER_CAP, FrontierCapExceeded, build_frontier_graph, verify_sc
from .oracle import DEFAULT_CAP, OracleCapExceeded, oracle_verify_sc
from .pending_period import UnassignableTrace, assign_pending_periods, measure_C, overlap_histogram
from .simulator import (
    FaultKind,
    SimConfig,
    TraceTooSmall,
    generate_execution,
    inject_fault,
    sample_observations,
    serialize_annotated,
)
from .trace_model import TraceFormatError, parse_trace, serialize_trace

EXIT_PASS, EXIT_FAIL, EXIT_IO, EXIT_CAP, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(obj, pretty: bool) -> None:
    if pretty:
        print(json.dumps(obj, indent=2))
    else:
        print(json.dumps(obj, separators=(",", ":")))


def _frontier_cap(args) -> int:
    if args.cap is not None:
        return args.cap
    env = os.environ.get("PPA_FRONTIER_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PPA_FRONTIER_CAP must be an integer, got {env!r}") from None
    return DEFAULT_FRONTIER_CAP


def _load_assigned(path: Path):
    trace = parse_trace(path.read_bytes())
    return assign_pending_periods(trace)


def _sidecar(out: Path, tag: str) -> Path:
    stem = out.name[: -len(".jsonl")] if out.name.endswith(".jsonl") else out.name
    return out.with_name(f"{stem}.{tag}")


def cmd_generate(args) -> int:
    try:
        config = SimConfig(
            num_procs=args.procs, ops_per_proc=args.ops, num_addrs=args.addrs,
            max_pending_len=args.max_pending, min_pending_len=args.min_pending,
            gap_min=args.gap_min, gap_max=args.gap_max, write_prob=args.write_prob, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.observe < 1:
        raise UsageError("--observe must be >= 1")
    annotated = generate_execution(config)
    descriptor = None
    if args.fault:
        try:
            annotated, descriptor = inject_fault(annotated, FaultKind(args.fault), args.fault_seed)
        except TraceTooSmall as exc:
            raise UsageError(f"cannot inject {args.fault}: {exc}") from None
    out = Path(args.output)
    out.write_bytes(serialize_trace(sample_observations(annotated, args.observe)))
    _sidecar(out, "truth.jsonl").write_bytes(serialize_annotated(annotated))
    if descriptor is not None:
        _sidecar(out, "fault.json").write_text(descriptor.to_json() + "\n")
    return EXIT_PASS


def _verify_one(path: str, oracle: bool, memoize: bool, timing: bool) -> dict:
    assigned = _load_assigned(Path(path))
    if oracle:
        verdict = oracle_verify_sc(assigned, DEFAULT_CAP)
    else:
        verdict = verify_sc(assigned, memoize=memoize, timing=timing)
    return verdict.to_report()


def _trace_files(root: Path) -> list[Path]:
    return sorted(p for p in root.glob("*.jsonl") if not p.name.endswith(".truth.jsonl"))


def cmd_verify(args) -> int:
    target = Path(args.trace)
    if target.is_dir():
        files = _trace_files(target)
        jobs = max(1, args.jobs)
        call = [(str(p), args.oracle, not args.no_memo, args.timing) for p in files]
        if jobs > 1 and len(files) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(_verify_one, *zip(*call)))
        else:
            reports = [_verify_one(*c) for c in call]
        _emit({"reports": [{"file": p.name, **r} for p, r in zip(files, reports)]}, args.pretty)
        return EXIT_FAIL if any(r["verdict"] == "FAIL" for r in reports) else EXIT_PASS
    report = _verify_one(str(target), args.oracle, not args.no_memo, args.timing)
    _emit(report, args.pretty)
    return EXIT_PASS if report["verdict"] == "PASS" else EXIT_FAIL


def cmd_query(args) -> int:
    assigned = _load_assigned(Path(args.trace))
    for op_id in (args.u, args.v):
        if op_id not in assigned.periods:
            raise UsageError(f"unknown op id {op_id}")
    if assigned[args.u].proc == assigned[args.v].proc:
        raise UsageError(f"ops {args.u} and {args.v} are on the same processor")
    graph = build_frontier_graph(assigned, _frontier_cap(args))
    _emit(order_query(graph, args.u, args.v).to_dict(), args.pretty)
    return EXIT_PASS


def cmd_stats(args) -> int:
    assigned = _load_assigned(Path(args.trace))
    n, p = len(assigned), assigned.num_procs
    c = measure_C(assigned)
    graph = build_frontier_graph(assigned, _frontier_cap(args))
    bound = n * (c + 1) ** (p - 1) + 1
    report = {
        "n": n,
        "p": p,
        "measured_C": c,
        "overlap_histogram": {str(k): v for k, v in overlap_histogram(assigned).items()},
        "frontier_nodes": graph.num_nodes,
        "frontier_edges": graph.num_edges,
        "node_bound": bound,
        "bound_check": graph.num_nodes <= bound,
    }
    if args.timing:
        t0 = time.perf_counter()
        verify_sc(assigned)
        report["verify_seconds"] = round(time.perf_counter() - t0, 6)
    _emit(report, args.pretty)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ppa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="simulate an SC-legal execution")
    gen.add_argument("--procs", type=int, default=2)
    gen.add_argument("--ops", type=int, default=8, help="operations per processor")
    gen.add_argument("--addrs", type=int, default=2)
    gen.add_argument("--max-pending", type=int, default=8, help="upper bound B on period length")
    gen.add_argument("--min-pending", type=int, default=0)
    gen.add_argument("--gap-min", type=int, default=1)
    gen.add_argument("--gap-max", type=int, default=4)
    gen.add_argument("--write-prob", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-m", "--observe", type=int, default=1, help="observe one op in every m")
    gen.add_argument("--fault", choices=[k.value for k in FaultKind])
    gen.add_argument("--fault-seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True)
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="check a trace (or a directory of traces) for SC")
    ver.add_argument("trace")
    ver.add_argument("--oracle", action="store_true", help="use the brute-force oracle")
    ver.add_argument("--jobs", type=int, default=1)
    ver.add_argument("--no-memo", action="store_true", help="disable the failed-state memo")
    ver.set_defaults(func=cmd_verify)

    qry = sub.add_parser("query", help="must/could-have happened-before for two ops")
    qry.add_argument("trace")
    qry.add_argument("--u", type=int, required=True)
    qry.add_argument("--v", type=int, required=True)
    qry.add_argument("--cap", type=int, default=None, help="frontier node cap")
    qry.set_defaults(func=cmd_query)

    st = sub.add_parser("stats", help="overlap and frontier-graph statistics")
    st.add_argument("trace")
    st.add_argument("--cap", type=int, default=None, help="frontier node cap")
    st.set_defaults(func=cmd_stats)

    for p in (ver, qry, st):
        p.add_argument("--pretty", action="store_true")
    for p in (ver, st):
        p.add_argument("--timing", action="store_true", help="include wall-clock fields")
    qry.set_defaults(timing=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ppa: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FrontierCapExceeded, OracleCapExceeded) as exc:
        print(f"ppa: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (OSError, TraceFormatError, UnassignableTrace) as exc:
        print(f"ppa: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
