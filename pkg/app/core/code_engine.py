from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from app.core import analysis
from app.core.config import StrongIdConfig
from app.core.errors import InvalidParameters, InvalidVertex, NotRStrong, TooLargeForExact, TooSmall
from app.core.graph_core import Graph, closed_neighborhood, degree_stats, row_blocks
from app.core.seeding import bernoulli_draws, check_seed, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeParams:
    r: int
    d: int = 1

    def __post_init__(self):
        if self.r < 1:
            raise InvalidParameters(f"index r must be >= 1, got {self.r}")
        if self.d < 1:
            raise InvalidParameters(f"slack d must be >= 1, got {self.d}")


@dataclass(frozen=True)
class CodeResult:
    """
    Output of the randomized construction:
      sampled      Z, the Bernoulli(q) sample
      bad          Y_b, vertices failing the local count test against Z
      bad_closure  Z_b, union of N[v] over bad v
      code         Y = Z ∪ Z_b
    """
    code: FrozenSet[int]
    sampled: FrozenSet[int]
    bad: FrozenSet[int]
    bad_closure: FrozenSet[int]
    q_used: float
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": sorted(self.code),
            "sampled": sorted(self.sampled),
            "bad": sorted(self.bad),
            "bad_closure": sorted(self.bad_closure),
            "sizes": {
                "code": len(self.code),
                "sampled": len(self.sampled),
                "bad": len(self.bad),
                "bad_closure": len(self.bad_closure),
            },
            "q_used": self.q_used,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class VerifyOutcome:
    valid: bool
    achieved_min: int
    witness: Optional[Tuple[int, int, int]] = None  # (v, u, count)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"valid": self.valid, "achieved_min": self.achieved_min}
        if self.witness is not None:
            v, u, count = self.witness
            out["witness"] = {"v": v, "u": u, "count": count}
        return out


# ----------------------------
# Pair-count kernel
# ----------------------------

def _indicator(n: int, members: Iterable[int]) -> np.ndarray:
    vec = np.zeros(n, dtype=np.float32)
    ids = list(members)
    if ids:
        idx = np.asarray(ids, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= n:
            bad = int(idx[(idx < 0) | (idx >= n)][0])
            raise InvalidVertex(f"vertex {bad} outside [0, {n})", vertex=bad)
        vec[idx] = 1.0
    return vec


def _restricted_min(G: Graph, weights: Optional[np.ndarray], local_only: bool) -> Tuple[int, Optional[Tuple[int, int]]]:
    """
    Minimum over ordered pairs v != u of #((N[v] \\ N[u]) ∩ S), where S is given by the
    0/1 vector `weights` (all of V when None), together with the lexicographically
    first (v, u) attaining it.

    The count is #(N[v] ∩ S) - #(N[v] ∩ N[u] ∩ S). When `local_only` is set only u
    with N[v] ∩ N[u] non-empty (graph distance <= 2) are scanned; for the others the
    count is #(N[v] ∩ S).
    """
    n = G.n
    Ac = G.closed_matrix
    Aw = Ac if weights is None else Ac * weights[None, :]
    own = Aw.sum(axis=1)

    best = math.inf
    best_pair: Optional[Tuple[int, int]] = None
    for start, stop in row_blocks(n):
        if weights is None:
            overlap = G.closed_overlap[start:stop]
        else:
            overlap = Ac[start:stop] @ Aw.T
        counts = own[start:stop, None] - overlap
        rows = np.arange(stop - start)
        counts[rows, rows + start] = np.inf
        if local_only:
            counts = np.where(G.closed_overlap[start:stop] > 0, counts, np.inf)
        flat = int(np.argmin(counts))
        value = float(counts.flat[flat])
        if value < best:
            best = value
            i, j = divmod(flat, n)
            best_pair = (start + i, j)
    if best_pair is None or math.isinf(best):
        return -1, None
    return int(round(best)), best_pair


# ----------------------------
# Strong index and verification
# ----------------------------

def strong_index_witness(G: Graph) -> Tuple[int, int, int]:
    """(index, v, u): the strong index and the first ordered pair attaining it."""
    if G.n < 2:
        raise TooSmall(f"strong index needs at least 2 vertices, got n={G.n}", n=G.n)
    value, pair = _restricted_min(G, None, local_only=False)
    v, u = pair
    return value, v, u


def strong_index(G: Graph) -> int:
    """Largest k such that #(N[v] \\ N[u]) >= k for every ordered pair v != u."""
    return strong_index_witness(G)[0]


def is_identification_code(G: Graph, C: Iterable[int], r: int) -> VerifyOutcome:
    """
    Checks #((N[v] \\ N[u]) ∩ C) >= r for every ordered pair of distinct vertices.
    On failure the witness is the lexicographically first pair attaining the minimum
    count. That pair always fails; for r >= 2 it can differ from the first failing
    pair, which may fail with a larger count.
    """
    if r < 1:
        raise InvalidParameters(f"index r must be >= 1, got {r}")
    if G.n < 2:
        raise TooSmall(f"verification needs at least 2 vertices, got n={G.n}", n=G.n)
    weights = _indicator(G.n, C)
    achieved, (v, u) = _restricted_min(G, weights, local_only=False)
    if achieved >= r:
        return VerifyOutcome(valid=True, achieved_min=achieved)
    return VerifyOutcome(valid=False, achieved_min=achieved, witness=(v, u, achieved))


def bad_vertices(G: Graph, Z: Iterable[int], r: int) -> FrozenSet[int]:
    """
    v is bad when #(N[v] ∩ Z) <= r-1, or when some w != v within distance two has
    #((N[v] \\ N[w]) ∩ Z) <= r-1. Farther w give N[v] \\ N[w] = N[v], which the
    first condition already covers.
    """
    n = G.n
    Ac = G.closed_matrix
    weights = _indicator(n, Z)
    Aw = Ac * weights[None, :]
    own = Aw.sum(axis=1)

    bad = set(np.flatnonzero(own <= r - 1).tolist())
    for start, stop in row_blocks(n):
        near = G.closed_overlap[start:stop] > 0
        rows = np.arange(stop - start)
        near[rows, rows + start] = False
        counts = own[start:stop, None] - Ac[start:stop] @ Aw.T
        hit = np.any(near & (counts <= r - 1), axis=1)
        bad.update((np.flatnonzero(hit) + start).tolist())
    return frozenset(bad)


# ----------------------------
# Randomized construction
# ----------------------------

def bound_delta(G: Graph) -> int:
    """Max degree fed to the closed-form bounds, which need Δ >= 2."""
    delta = degree_stats(G).delta_max
    if delta < 2:
        logger.info("max degree %d < 2; bounds use delta=2", delta)
        return 2
    return delta


def default_q(G: Graph, params: CodeParams) -> float:
    return analysis.q_star(bound_delta(G), params.r, params.d)


def randomized_code(
    G: Graph,
    params: CodeParams,
    q: Optional[float] = None,
    seed: int = 0,
    check_strength: bool = True,
) -> CodeResult:
    """
    Samples Z, marks bad vertices and returns Y = Z ∪ Z_b. Callers running many
    samples on one graph check the strong index once and pass check_strength=False.
    """
    seed = check_seed(seed)
    if q is not None and not math.isfinite(q):
        raise InvalidParameters(f"sampling probability must be finite, got {q!r}")
    if check_strength:
        achieved = strong_index(G)
        if achieved < params.r:
            raise NotRStrong(required=params.r, achieved=achieved)

    if q is None:
        q = default_q(G, params)
    q_used = min(1.0, max(0.0, float(q)))
    if q_used != q:
        logger.info("sampling probability %r clamped to %r", q, q_used)

    rng = make_rng(seed)
    draws = bernoulli_draws(rng, q_used, G.n)
    sampled = frozenset(np.flatnonzero(draws).tolist())

    bad = bad_vertices(G, sampled, params.r)
    closure = set()
    for v in bad:
        closure |= closed_neighborhood(G, v)
    bad_closure = frozenset(closure)

    result = CodeResult(
        code=sampled | bad_closure,
        sampled=sampled,
        bad=bad,
        bad_closure=bad_closure,
        q_used=q_used,
        seed=seed,
    )
    logger.debug(
        "seed=%d q=%.6f |Z|=%d |Y_b|=%d |Z_b|=%d |Y|=%d",
        seed, q_used, len(sampled), len(bad), len(bad_closure), len(result.code),
    )
    return result


def expected_size_estimate(G: Graph, q: float, r: int) -> float:
    """
    Graph-specific bound on E#(Z ∪ Z_b):
        n (q + Δ max_v f1(q, #N[v]) + Δ^3 max_{v,w} f2(q, #(N[v] \\ N[w])))
    with w ranging over vertices at distance <= 2 from v. The binomial lower tail
    shrinks as its trial count grows, so each max sits at the smallest argument.
    """
    if G.n < 2:
        raise TooSmall(f"estimate needs at least 2 vertices, got n={G.n}", n=G.n)
    delta = degree_stats(G).delta_max
    f1 = analysis.f1_prob(q, int(G.degrees.min()) + 1, r)
    local_min, _ = _restricted_min(G, None, local_only=True)
    f2 = analysis.f2_prob(q, local_min, r) if local_min >= 0 else 0.0
    return G.n * (q + delta * f1 + delta**3 * f2)


# ----------------------------
# Exhaustive oracle
# ----------------------------

def _distinguishing_masks(G: Graph) -> List[int]:
    closed = [sum(1 << x for x in closed_neighborhood(G, v)) for v in range(G.n)]
    masks = {closed[v] & ~closed[u] for v in range(G.n) for u in range(G.n) if v != u}
    # small masks fail first
    return sorted(masks, key=lambda m: (m.bit_count(), m))


def exact_min_code(
    G: Graph,
    r: int,
    size_cap: Optional[int] = None,
    limit: Optional[int] = None,
) -> Optional[Tuple[int, FrozenSet[int]]]:
    """
    Minimum-cardinality code with index r by exhaustive search. Subsets are tried by
    increasing size starting at ceil(n / (Δ+1)), lexicographically within a size; the
    first valid one is returned. None when no code exists (strong index < r) or none
    fits under `size_cap`.
    """
    if limit is None:
        limit = StrongIdConfig.from_env().exact_cap
    if G.n > limit:
        raise TooLargeForExact(G.n, limit)
    if r < 1:
        raise InvalidParameters(f"index r must be >= 1, got {r}")
    if G.n < 2:
        raise TooSmall(f"exact search needs at least 2 vertices, got n={G.n}", n=G.n)

    masks = _distinguishing_masks(G)
    if min(m.bit_count() for m in masks) < r:
        return None

    start = -(-G.n // (degree_stats(G).delta_max + 1))
    stop = G.n if size_cap is None else min(G.n, size_cap)
    for k in range(start, stop + 1):
        for combo in itertools.combinations(range(G.n), k):
            cmask = 0
            for v in combo:
                cmask |= 1 << v
            if all((m & cmask).bit_count() >= r for m in masks):
                logger.debug("exact search: size %d found", k)
                return k, frozenset(combo)
    return None
