from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.core.code_engine import strong_index_witness
from app.core.errors import (
    ChainVerificationError,
    GenerationFailed,
    InfeasibleP,
    InvalidParameters,
    InvalidSize,
)
from app.core.graph_core import (
    Graph,
    build_graph,
    degree_stats,
    first_unreachable,
    is_connected,
    max_common_pair,
)
from app.core.seeding import (
    STREAM_CHAIN_BLOCK,
    STREAM_LEMMA_ATTEMPT,
    bernoulli_draws,
    derive_seed,
    make_rng,
)

logger = logging.getLogger(__name__)


# ----------------------------
# Fixture families
# ----------------------------

def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidSize(f"cycle needs n >= 3, got {n}", n=n)
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    if n < 1:
        raise InvalidSize(f"complete graph needs n >= 1, got {n}", n=n)
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n: int) -> Graph:
    if n < 1:
        raise InvalidSize(f"path needs n >= 1, got {n}", n=n)
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> Graph:
    """K_{1,n-1} centred at vertex 0."""
    if n < 1:
        raise InvalidSize(f"star needs n >= 1, got {n}", n=n)
    return build_graph(n, [(0, i) for i in range(1, n)])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner)


# ----------------------------
# G(n, p)
# ----------------------------

def gnp(n: int, p: float, seed: int) -> Graph:
    """
    Each pair i < j, taken in lexicographic order, gets one Bernoulli(p) draw from
    the seeded stream; pair (i, j) always consumes the same stream position for a
    given n.
    """
    if n < 1:
        raise InvalidSize(f"G(n,p) needs n >= 1, got {n}", n=n)
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters(f"p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = bernoulli_draws(rng, p, rows.size)
    return build_graph(n, zip(rows[keep].tolist(), cols[keep].tolist()))


# ----------------------------
# Lemma graphs
# ----------------------------

def lemma_p(n: int, y: int) -> float:
    """p = max(16 ln n, 4y) / (n-1)."""
    if n < 2:
        raise InvalidParameters(f"n must be >= 2, got {n}")
    if y < 3:
        raise InvalidParameters(f"y must be >= 3, got {y}")
    p = max(16.0 * math.log(n), 4.0 * y) / (n - 1)
    if p > 1.0:
        raise InfeasibleP(f"p = {p:.4f} > 1: n={n} is too small for y={y}", n=n, y=y, p=p)
    return p


def min_lemma_size(y: int) -> int:
    return 160 * y * y + 1


@dataclass(frozen=True)
class LemmaParams:
    n: int
    y: int
    p: float
    max_retries: int = 100

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameters(f"n must be >= 2, got {self.n}")
        if self.y < 3:
            raise InvalidParameters(f"y must be >= 3, got {self.y}")
        if not 0.0 < self.p <= 1.0:
            raise InvalidParameters(f"p must lie in (0, 1], got {self.p}")
        if self.max_retries < 1:
            raise InvalidParameters(f"max_retries must be >= 1, got {self.max_retries}")

    @classmethod
    def from_size(cls, n: int, y: int, max_retries: int = 100, check_size: bool = True) -> "LemmaParams":
        p = lemma_p(n, y)
        if check_size and n < min_lemma_size(y):
            raise InvalidParameters(
                f"n={n} below the block size 160y^2+1 = {min_lemma_size(y)} for y={y}",
                n=n,
                y=y,
            )
        return cls(n=n, y=y, p=p, max_retries=max_retries)

    @property
    def degree_cap(self) -> float:
        return 2.0 * (self.n - 1) * self.p

    @property
    def common_cap(self) -> float:
        return (self.n - 1) * self.p / 4.0

    @property
    def strong_target(self) -> int:
        return self.y - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "y": self.y,
            "p": self.p,
            "max_retries": self.max_retries,
            "degree_cap": self.degree_cap,
            "common_cap": self.common_cap,
            "strong_target": self.strong_target,
        }


@dataclass
class LemmaVerdict:
    degree_ok: bool
    common_ok: bool
    strong_ok: bool
    connected_ok: bool
    max_degree: int
    max_common: int
    strong_index: int
    witnesses: Dict[str, Any] = field(default_factory=dict)
    attempts_used: int = 1

    @property
    def passed(self) -> bool:
        return self.degree_ok and self.common_ok and self.strong_ok and self.connected_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "degree_ok": self.degree_ok,
            "common_ok": self.common_ok,
            "strong_ok": self.strong_ok,
            "connected_ok": self.connected_ok,
            "max_degree": self.max_degree,
            "max_common": self.max_common,
            "strong_index": self.strong_index,
            "witnesses": self.witnesses,
            "attempts_used": self.attempts_used,
        }


def verify_lemma_graph(G: Graph, params: LemmaParams) -> LemmaVerdict:
    if G.n != params.n:
        raise InvalidParameters(f"graph has {G.n} vertices, parameters are for n={params.n}")

    witnesses: Dict[str, Any] = {}

    max_degree = degree_stats(G).delta_max
    degree_ok = max_degree <= params.degree_cap
    if not degree_ok:
        witnesses["degree"] = {"vertex": int(np.argmax(G.degrees)), "degree": max_degree}

    max_common, pair = max_common_pair(G)
    common_ok = max_common <= params.common_cap
    if not common_ok:
        witnesses["common"] = {"pair": list(pair), "count": max_common}

    index, v, u = strong_index_witness(G)
    strong_ok = index >= params.strong_target
    if not strong_ok:
        witnesses["strong"] = {"pair": [v, u], "count": index}

    missing = first_unreachable(G)
    connected_ok = missing is None
    if not connected_ok:
        witnesses["connected"] = {"unreachable": missing}

    return LemmaVerdict(
        degree_ok=degree_ok,
        common_ok=common_ok,
        strong_ok=strong_ok,
        connected_ok=connected_ok,
        max_degree=max_degree,
        max_common=max_common,
        strong_index=index,
        witnesses=witnesses,
    )


def generate_lemma_graph(params: LemmaParams, seed: int) -> Tuple[Graph, LemmaVerdict]:
    """Draw G(n, p) with derived per-attempt seeds until one passes every check."""
    verdict: Optional[LemmaVerdict] = None
    for attempt in range(params.max_retries):
        G = gnp(params.n, params.p, derive_seed(seed, STREAM_LEMMA_ATTEMPT, attempt))
        verdict = verify_lemma_graph(G, params)
        verdict.attempts_used = attempt + 1
        if verdict.passed:
            logger.info("lemma graph n=%d y=%d accepted on attempt %d", params.n, params.y, attempt + 1)
            return G, verdict
        failed = [k for k in ("degree", "common", "strong", "connected") if k in verdict.witnesses]
        logger.info("lemma graph attempt %d rejected: %s", attempt + 1, ", ".join(failed))
    raise GenerationFailed(
        f"no passing G({params.n}, {params.p:.6f}) in {params.max_retries} attempts",
        verdict=verdict,
    )


# ----------------------------
# Block chaining
# ----------------------------

def m_of_w(w: int, c_override: Optional[int] = None) -> int:
    """M(w) = max(C, 160(w+1)^2 + 1); C defaults to 1."""
    if w < 2:
        raise InvalidParameters(f"w must be >= 2, got {w}")
    return max(1 if c_override is None else int(c_override), 160 * (w + 1) ** 2 + 1)


@dataclass
class ChainPlan:
    w: int
    M: int
    block_sizes: List[int]
    link_pairs: List[Tuple[int, int]]
    delta0: float = 0.0

    @property
    def offsets(self) -> List[int]:
        out, acc = [], 0
        for size in self.block_sizes:
            out.append(acc)
            acc += size
        return out

    def block_of(self, v: int) -> int:
        for i, (start, size) in enumerate(zip(self.offsets, self.block_sizes)):
            if start <= v < start + size:
                return i
        raise InvalidParameters(f"vertex {v} outside the plan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w": self.w,
            "M": self.M,
            "block_sizes": list(self.block_sizes),
            "link_pairs": [list(p) for p in self.link_pairs],
            "delta0": self.delta0,
        }


def plan_chain(n: int, w: int, c_override: Optional[int] = None) -> ChainPlan:
    M = m_of_w(w, c_override)
    if n < M:
        raise InvalidParameters(f"n={n} is below M(w)={M} for w={w}", n=n, M=M)
    T = n // M
    sizes = [M] * (T - 1) + [n - (T - 1) * M]
    offsets = [i * M for i in range(T)]
    # Local id 0 is each block's in-port and local id 1 its out-port.
    links = [(offsets[i] + 1, offsets[i + 1]) for i in range(T - 1)]
    return ChainPlan(w=w, M=M, block_sizes=sizes, link_pairs=links)


def build_strong_graph(
    n: int,
    w: int,
    seed: int,
    max_retries: int = 100,
    c_override: Optional[int] = None,
    workers: int = 1,
) -> Tuple[Graph, ChainPlan, List[LemmaVerdict]]:
    plan = plan_chain(n, w, c_override)
    block_params = [LemmaParams.from_size(size, w + 1, max_retries) for size in plan.block_sizes]

    def _block(i: int) -> Tuple[Graph, LemmaVerdict]:
        try:
            return generate_lemma_graph(block_params[i], derive_seed(seed, STREAM_CHAIN_BLOCK, i))
        except GenerationFailed as e:
            raise GenerationFailed(f"block {i}: {e.message}", verdict=e.verdict, block_index=i)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        blocks = list(pool.map(_block, range(len(plan.block_sizes))))

    edges: List[Tuple[int, int]] = []
    for (G_b, _), start in zip(blocks, plan.offsets):
        edges.extend((start + u, start + v) for u, v in G_b.edges())
    edges.extend(plan.link_pairs)
    G = build_graph(n, edges)

    plan.delta0 = max(p.degree_cap for p in block_params)
    _recheck_chain(G, plan)
    logger.info("chained %d blocks into n=%d (links=%d)", len(blocks), n, len(plan.link_pairs))
    return G, plan, [verdict for _, verdict in blocks]


def _recheck_chain(G: Graph, plan: ChainPlan) -> None:
    if not is_connected(G):
        raise ChainVerificationError("chained graph is not connected")
    index, v, u = strong_index_witness(G)
    if index < plan.w:
        raise ChainVerificationError(
            f"chained graph has strong index {index} < {plan.w}", pair=[v, u], strong_index=index
        )
    max_degree = degree_stats(G).delta_max
    if max_degree > plan.delta0 + 1:
        raise ChainVerificationError(
            f"max degree {max_degree} exceeds delta0 + 1 = {plan.delta0 + 1:.3f}", max_degree=max_degree
        )

