from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler

from app.core.analysis import gamma, theta_bounds
from app.core.code_engine import (
    CodeParams,
    bound_delta,
    exact_min_code,
    expected_size_estimate,
    is_identification_code,
    randomized_code,
    strong_index_witness,
)
from app.core.config import StrongIdConfig
from app.core.errors import EXIT_INPUT, InvalidParameters, NotRStrong, ParseError, StrongIdError
from app.core.experiment import (
    SCHEMA,
    ExperimentSpec,
    dump_json,
    generate,
    load_graph_source,
    run_trials,
    summarize,
    write_outputs,
)
from app.core.graph_core import degree_stats, is_connected, read_graph, write_graph

logger = logging.getLogger("strongid")

RANDOMIZED_KINDS = {"gnp", "lemma", "chain"}


def configure_logging(level: str) -> None:
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)


def emit(payload: Dict[str, Any]) -> None:
    sys.stdout.write(dump_json({"schema": SCHEMA, **payload}))


def read_code(text: str) -> List[int]:
    """Vertex ids separated by commas and/or whitespace, or a JSON list."""
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON code list: {e.msg}", e.lineno)
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in values):
            raise ParseError("code list must hold integers", 1)
        return list(values)
    out = []
    for lineno, line in enumerate(text.splitlines() or [""], start=1):
        for token in line.replace(",", " ").split():
            if not (token.isascii() and token.isdigit()):
                raise ParseError(f"expected a vertex id, got {token!r}", lineno)
            out.append(int(token))
    return out


def load_code(args: argparse.Namespace) -> List[int]:
    if args.code_file:
        p = Path(args.code_file)
        if not p.is_file():
            raise FileNotFoundError(f"Code file not found: {p}")
        return read_code(p.read_text(encoding="utf-8"))
    return read_code(args.code or "")


# ----------------------------
# Commands
# ----------------------------

def cmd_gen(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    if args.kind in RANDOMIZED_KINDS and args.seed is None:
        raise InvalidParameters(f"generator {args.kind!r} needs an explicit --seed")
    options = {
        "n": args.n, "p": args.p, "y": args.y, "w": args.w,
        "seed": args.seed, "c_override": args.c_override,
    }
    G, report = generate(
        args.kind,
        {k: v for k, v in options.items() if v is not None},
        max_retries=args.max_retries or cfg.max_retries,
        workers=args.workers or cfg.workers,
    )
    write_graph(G, args.out)
    logger.info("wrote %s (n=%d, m=%d)", args.out, G.n, G.m)
    emit({"kind": args.kind, "n": G.n, "m": G.m, "out": str(args.out), **report})
    return 0


def cmd_verify(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    G = read_graph(args.graph)
    code = load_code(args)
    outcome = is_identification_code(G, code, args.r)
    emit({"r": args.r, "code_size": len(set(code)), **outcome.to_dict()})
    return 0 if outcome.valid else 1


def cmd_construct(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    G = read_graph(args.graph)
    params = CodeParams(r=args.r, d=args.d)
    try:
        result = randomized_code(G, params, q=args.q, seed=args.seed)
    except NotRStrong as e:
        emit({"r": args.r, "achieved_strong_index": e.achieved, "error": e.to_dict()})
        return e.exit_code

    outcome = is_identification_code(G, result.code, params.r)
    index, _, _ = strong_index_witness(G)
    delta = bound_delta(G)
    emit({
        "n": G.n,
        "r": params.r,
        "d": params.d,
        "strong_index": index,
        "delta_max": degree_stats(G).delta_max,
        "result": result.to_dict(),
        "verify": outcome.to_dict(),
        "gamma_bound": G.n * gamma(result.q_used, delta, params.r, params.d),
        "graph_estimate": expected_size_estimate(G, result.q_used, params.r),
    })
    return 0


def cmd_exact(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    G = read_graph(args.graph)
    found = exact_min_code(G, args.r, size_cap=args.size_cap, limit=args.limit or cfg.exact_cap)
    if found is None:
        emit({"n": G.n, "r": args.r, "theta": None, "code": None})
    else:
        size, code = found
        emit({"n": G.n, "r": args.r, "theta": size, "code": sorted(code)})
    return 0


def cmd_bounds(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    report = theta_bounds(args.n, args.delta_max, args.r, args.d)
    emit(report.to_dict())
    return 0


def cmd_experiment(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    spec = ExperimentSpec(
        graph_source=args.graph,
        r=args.r,
        d=args.d,
        q=args.q,
        trials=args.trials,
        master_seed=args.seed,
        csv_path=args.csv,
        summary_path=args.summary,
    )
    workers = args.workers or cfg.workers
    G = load_graph_source(spec.graph_source, max_retries=cfg.max_retries, workers=workers)
    records = run_trials(G, spec, workers=workers, progress=not args.quiet)
    summary = summarize(records, spec)
    write_outputs(records, summary, spec)
    logger.info("%d trials, mean code size %.3f", len(records), summary["mean_code_size"])
    sys.stdout.write(dump_json(summary))
    return 0


def cmd_stats(args: argparse.Namespace, cfg: StrongIdConfig) -> int:
    G = read_graph(args.graph)
    stats = degree_stats(G)
    payload: Dict[str, Any] = {
        "n": G.n,
        "m": G.m,
        "delta_max": stats.delta_max,
        "delta_min": stats.delta_min,
        "connected": is_connected(G),
    }
    if G.n >= 2:
        index, v, u = strong_index_witness(G)
        payload["strong_index"] = index
        payload["strong_witness"] = [v, u]
    emit(payload)
    return 0


# ----------------------------
# Parser
# ----------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="StrongID - identification codes with index r on simple graphs")
    parser.add_argument("--log-level", default=None, help="Logging level (default: STRONGID_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Generate a graph and write it as an edge list")
    p.add_argument("kind", choices=["cycle", "complete", "path", "star", "petersen", "gnp", "lemma", "chain"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="Edge probability (gnp)")
    p.add_argument("--y", type=int, help="Strength parameter (lemma)")
    p.add_argument("--w", type=int, help="Target strong index (chain)")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-retries", type=int)
    p.add_argument("--c-override", type=int, help="Lower bound on the chain block size")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="Output edge-list path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="Check a vertex set against the index-r condition")
    p.add_argument("graph")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--code", help="Vertex ids, e.g. 0,1,2,3")
    group.add_argument("--code-file", help="File with vertex ids")
    p.add_argument("--r", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="Run the randomized code construction")
    p.add_argument("graph")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--q", type=float, help="Sampling probability (default: the optimized q)")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("exact", help="Minimum code size by exhaustive search")
    p.add_argument("graph")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--size-cap", type=int)
    p.add_argument("--limit", type=int, help="Largest n searched (default: STRONGID_EXACT_CAP or 24)")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bounds", help="Closed-form bounds on the minimum code size")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta-max", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="Monte-Carlo campaign of the randomized construction")
    p.add_argument("--graph", required=True, help="Edge-list path or gen:KIND:key=value,...")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--q", type=float)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--csv", help="Per-trial CSV output path")
    p.add_argument("--summary", help="Summary JSON output path")
    p.add_argument("--workers", type=int)
    p.add_argument("--quiet", action="store_true", help="Hide the progress bar")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="Degree, connectivity and strong index of a graph")
    p.add_argument("graph")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = StrongIdConfig.from_env()
        configure_logging(args.log_level.upper() if args.log_level else cfg.log_level)
        return args.func(args, cfg)
    except StrongIdError as e:
        sys.stderr.write(json.dumps({"schema": SCHEMA, "error": e.to_dict()}, sort_keys=True) + "\n")
        return e.exit_code
    except FileNotFoundError as e:
        sys.stderr.write(json.dumps({"schema": SCHEMA, "error": {"type": "FileNotFound", "message": str(e)}}) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
