from __future__ import annotations

from itertools import combinations
from typing import FrozenSet, List, Tuple

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from app.core.graph_core import Graph, build_graph
from app.core.generators import complete, cycle, path, petersen

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)


@st.composite
def small_graphs(draw: st.DrawFn, min_n: int = 2, max_n: int = 12) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs = list(combinations(range(n), 2))
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return build_graph(n, edges)


def naive_closed(G: Graph, v: int) -> FrozenSet[int]:
    return frozenset(G.adj[v]) | {v}


def naive_min_count(G: Graph, C) -> Tuple[int, Tuple[int, int]]:
    """Materializes every N[v] \\ N[u] and intersects it with C."""
    code = set(C)
    best, best_pair = None, None
    for v in range(G.n):
        for u in range(G.n):
            if u == v:
                continue
            count = len((naive_closed(G, v) - naive_closed(G, u)) & code)
            if best is None or count < best:
                best, best_pair = count, (v, u)
    return best, best_pair


def write_edge_list(tmp_path, name: str, n: int, edges: List[Tuple[int, int]]) -> str:
    p = tmp_path / name
    lines = [f"{n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    p.write_text("\n".join(lines) + "\n", encoding="ascii")
    return str(p)


@pytest.fixture
def c4() -> Graph:
    return cycle(4)


@pytest.fixture
def c6() -> Graph:
    return cycle(6)


@pytest.fixture
def k3() -> Graph:
    return complete(3)


@pytest.fixture
def k4() -> Graph:
    return complete(4)


@pytest.fixture
def pete() -> Graph:
    return petersen()


@pytest.fixture
def fixture_suite() -> List[Tuple[str, Graph]]:
    out = [(f"C{n}", cycle(n)) for n in range(4, 15)]
    out += [(f"P{n}", path(n)) for n in range(2, 9)]
    out.append(("petersen", petersen()))
    return out
