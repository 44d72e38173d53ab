from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from app.core import generators
from app.core.analysis import gamma
from app.core.code_engine import CodeParams, bound_delta, is_identification_code, randomized_code, strong_index
from app.core.errors import InvalidParameters, NotRStrong
from app.core.graph_core import Graph, degree_stats, read_graph
from app.core.seeding import STREAM_TRIAL, check_seed, derive_seed

logger = logging.getLogger(__name__)

SCHEMA = "strongid/1"

CSV_HEADER = [
    "trial_index", "seed", "n", "delta_max", "r", "d",
    "q_used", "code_size", "n_bad", "valid", "gamma_bound",
]

GENERATOR_PREFIX = "gen:"


@dataclass
class ExperimentSpec:
    graph_source: str
    r: int = 1
    d: int = 1
    q: Optional[float] = None
    trials: int = 1
    master_seed: int = 0
    csv_path: Optional[str] = None
    summary_path: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameters(f"trials must be >= 1, got {self.trials}")
        if self.q is not None and not 0.0 <= self.q <= 1.0:
            raise InvalidParameters(f"q must lie in [0, 1], got {self.q}")
        check_seed(self.master_seed)

    @property
    def params(self) -> CodeParams:
        return CodeParams(r=self.r, d=self.d)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    derived_seed: int
    n: int
    delta_max: int
    r: int
    d: int
    q_used: float
    code_size: int
    n_bad: int
    valid: bool
    gamma_bound: float

    def row(self) -> List[str]:
        values = asdict(self)
        out = []
        for key in ("trial_index", "derived_seed", "n", "delta_max", "r", "d",
                    "q_used", "code_size", "n_bad", "valid", "gamma_bound"):
            value = values[key]
            if isinstance(value, bool):
                out.append("true" if value else "false")
            else:
                out.append(repr(value) if isinstance(value, float) else str(value))
        return out


# ----------------------------
# Graph sources
# ----------------------------

def parse_generator_spec(text: str) -> Tuple[str, Dict[str, str]]:
    """'lemma:n=1441,y=3,seed=7' -> ('lemma', {'n': '1441', 'y': '3', 'seed': '7'})."""
    kind, _, rest = text.partition(":")
    options: Dict[str, str] = {}
    for item in filter(None, (x.strip() for x in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise InvalidParameters(f"generator option must be key=value, got {item!r}")
        options[key.strip()] = value.strip()
    return kind.strip(), options


def _opt_int(options: Dict[str, Any], key: str, default: Optional[int] = None) -> int:
    if options.get(key) is None:
        if default is None:
            raise InvalidParameters(f"generator option {key!r} is required")
        return default
    try:
        return int(options[key])
    except (TypeError, ValueError):
        raise InvalidParameters(f"generator option {key!r} must be an integer, got {options[key]!r}")


def generate(kind: str, options: Dict[str, Any], max_retries: int = 100, workers: int = 1) -> Tuple[Graph, Dict[str, Any]]:
    """
    Builds a graph from a generator name and options. Returns the graph and the
    extra report (verdict / plan) worth printing, empty for fixtures.
    """
    if kind == "cycle":
        return generators.cycle(_opt_int(options, "n")), {}
    if kind == "complete":
        return generators.complete(_opt_int(options, "n")), {}
    if kind == "path":
        return generators.path(_opt_int(options, "n")), {}
    if kind == "star":
        return generators.star(_opt_int(options, "n")), {}
    if kind == "petersen":
        return generators.petersen(), {}
    if kind == "gnp":
        try:
            p = float(options.get("p"))
        except (TypeError, ValueError):
            raise InvalidParameters(f"generator option 'p' must be a number, got {options.get('p')!r}")
        return generators.gnp(_opt_int(options, "n"), p, _opt_int(options, "seed")), {}
    if kind == "lemma":
        params = generators.LemmaParams.from_size(
            _opt_int(options, "n"), _opt_int(options, "y"), _opt_int(options, "max_retries", max_retries)
        )
        G, verdict = generators.generate_lemma_graph(params, _opt_int(options, "seed"))
        return G, {"params": params.to_dict(), "verdict": verdict.to_dict()}
    if kind == "chain":
        c_override = options.get("c_override")
        G, plan, verdicts = generators.build_strong_graph(
            _opt_int(options, "n"),
            _opt_int(options, "w"),
            _opt_int(options, "seed"),
            max_retries=_opt_int(options, "max_retries", max_retries),
            c_override=None if c_override is None else _opt_int(options, "c_override"),
            workers=workers,
        )
        return G, {"plan": plan.to_dict(), "block_verdicts": [v.to_dict() for v in verdicts]}
    raise InvalidParameters(f"unknown generator {kind!r}")


def load_graph_source(source: str, max_retries: int = 100, workers: int = 1) -> Graph:
    if source.startswith(GENERATOR_PREFIX):
        kind, options = parse_generator_spec(source[len(GENERATOR_PREFIX):])
        return generate(kind, options, max_retries=max_retries, workers=workers)[0]
    return read_graph(source)


# ----------------------------
# Trials
# ----------------------------

def run_trial(G: Graph, spec: ExperimentSpec, index: int) -> TrialRecord:
    seed = derive_seed(spec.master_seed, STREAM_TRIAL, index)
    params = spec.params
    result = randomized_code(G, params, q=spec.q, seed=seed, check_strength=False)
    outcome = is_identification_code(G, result.code, params.r)
    return TrialRecord(
        trial_index=index,
        derived_seed=seed,
        n=G.n,
        delta_max=degree_stats(G).delta_max,
        r=params.r,
        d=params.d,
        q_used=result.q_used,
        code_size=len(result.code),
        n_bad=len(result.bad),
        valid=outcome.valid,
        gamma_bound=G.n * gamma(result.q_used, bound_delta(G), params.r, params.d),
    )


def run_trials(G: Graph, spec: ExperimentSpec, workers: int = 1, progress: bool = False) -> List[TrialRecord]:
    achieved = strong_index(G)
    if achieved < spec.r:
        raise NotRStrong(required=spec.r, achieved=achieved)

    def _one(i: int) -> TrialRecord:
        return run_trial(G, spec, i)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(
            tqdm(pool.map(_one, range(spec.trials)), total=spec.trials, desc="trials", disable=not progress)
        )
    records.sort(key=lambda rec: rec.trial_index)
    invalid = [rec.trial_index for rec in records if not rec.valid]
    if invalid:
        logger.warning("%d trials produced an invalid code (first: %d)", len(invalid), invalid[0])
    return records


def summarize(records: List[TrialRecord], spec: ExperimentSpec) -> Dict[str, Any]:
    sizes = np.array([rec.code_size for rec in records], dtype=np.float64)
    mean = float(sizes.mean())
    std = float(sizes.std(ddof=1)) if sizes.size > 1 else 0.0
    stderr = std / math.sqrt(sizes.size)
    # Sizes are integers: a spread-free sample cannot resolve the mean finer than 1/trials.
    margin = 3.0 * max(stderr, 1.0 / sizes.size)
    bound = records[0].gamma_bound
    return {
        "schema": SCHEMA,
        "trials": len(records),
        "master_seed": spec.master_seed,
        "n": records[0].n,
        "delta_max": records[0].delta_max,
        "r": spec.r,
        "d": spec.d,
        "q_used": records[0].q_used,
        "mean_code_size": mean,
        "std_code_size": std,
        "stderr_code_size": stderr,
        "gamma_bound": bound,
        "bound_margin": margin,
        "bound_respected": bool(mean <= bound + margin),
        "bound_respected_strict": bool(mean <= bound + 3.0 * stderr),
        "all_valid": all(rec.valid for rec in records),
    }


def render_csv(records: List[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def dump_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_outputs(records: List[TrialRecord], summary: Dict[str, Any], spec: ExperimentSpec) -> None:
    if spec.csv_path:
        p = Path(spec.csv_path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(render_csv(records).encode("utf-8"))
    if spec.summary_path:
        p = Path(spec.summary_path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(dump_json(summary).encode("utf-8"))
