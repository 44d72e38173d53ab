from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import numpy as np

from app.core.errors import InvalidEdge, InvalidParameters, InvalidVertex, ParseError, SameVertex, SelfLoop


# Rows per block for the matrix kernels; keeps an n=3000 pass well under 10 MB per block.
ROW_BLOCK = 512


@dataclass(frozen=True)
class Graph:
    """
    Immutable simple undirected graph on vertex ids 0..n-1.
    `adj[v]` is the open neighbourhood N(v). Dense 0/1 matrices for the pair-count
    kernels are built lazily and cached; they never take part in equality.
    """
    n: int
    adj: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameters(f"graph needs n >= 1, got {self.n}")
        if len(self.adj) != self.n:
            raise InvalidParameters(f"adjacency has {len(self.adj)} rows for n={self.n}")
        for v, nbrs in enumerate(self.adj):
            if v in nbrs:
                raise SelfLoop(f"self-loop at vertex {v}", vertex=v)
            for u in nbrs:
                if not 0 <= u < self.n:
                    raise InvalidEdge(f"neighbour {u} of {v} outside [0, {self.n})", edge=[v, u])
                if v not in self.adj[u]:
                    raise InvalidEdge(f"adjacency not symmetric for ({v}, {u})", edge=[v, u])

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=self.n)
        deg.setflags(write=False)
        return deg

    @cached_property
    def open_matrix(self) -> np.ndarray:
        # float32 keeps BLAS matmuls exact for 0/1 entries while n < 2**24.
        mat = np.zeros((self.n, self.n), dtype=np.float32)
        edges = self.edges()
        if edges:
            idx = np.asarray(edges, dtype=np.int64)
            mat[idx[:, 0], idx[:, 1]] = 1.0
            mat[idx[:, 1], idx[:, 0]] = 1.0
        mat.setflags(write=False)
        return mat

    @cached_property
    def closed_matrix(self) -> np.ndarray:
        mat = self.open_matrix.copy()
        np.fill_diagonal(mat, 1.0)
        mat.setflags(write=False)
        return mat

    @cached_property
    def closed_overlap(self) -> np.ndarray:
        """#(N[v] ∩ N[u]) for every pair; positive exactly when dist(v, u) <= 2."""
        Ac = self.closed_matrix
        out = np.empty((self.n, self.n), dtype=np.float32)
        for start, stop in row_blocks(self.n):
            out[start:stop] = Ac[start:stop] @ Ac.T
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class DegreeStats:
    delta_max: int
    delta_min: int


def build_graph(n: int, edges: Iterable[Tuple[int, int]]) -> Graph:
    if n < 1:
        raise InvalidParameters(f"graph needs n >= 1, got {n}")
    nbrs: List[Set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidEdge(f"edge ({u}, {v}) has an endpoint outside [0, {n})", edge=[u, v])
        if u == v:
            raise SelfLoop(f"self-loop ({u}, {u})", vertex=u)
        # sets collapse duplicate pairs
        nbrs[u].add(v)
        nbrs[v].add(u)
    return Graph(n=n, adj=tuple(frozenset(s) for s in nbrs))


def row_blocks(n: int, size: int = ROW_BLOCK) -> Iterator[Tuple[int, int]]:
    for start in range(0, n, size):
        yield start, min(start + size, n)


# ----------------------------
# Neighbourhood algebra
# ----------------------------

def check_vertex(G: Graph, v: int) -> int:
    if not 0 <= v < G.n:
        raise InvalidVertex(f"vertex {v} outside [0, {G.n})", vertex=v)
    return v


def closed_neighborhood(G: Graph, v: int) -> FrozenSet[int]:
    check_vertex(G, v)
    return G.adj[v] | {v}


def distinguishing_set(G: Graph, v: int, u: int) -> FrozenSet[int]:
    """N[v] \\ N[u]. Not symmetric in (v, u)."""
    check_vertex(G, v)
    check_vertex(G, u)
    if v == u:
        raise SameVertex(f"distinguishing set needs two distinct vertices, got {v} twice", vertex=v)
    return closed_neighborhood(G, v) - closed_neighborhood(G, u)


def common_neighbors(G: Graph, i: int, j: int) -> FrozenSet[int]:
    check_vertex(G, i)
    check_vertex(G, j)
    if i == j:
        raise SameVertex(f"common neighbours need two distinct vertices, got {i} twice", vertex=i)
    return G.adj[i] & G.adj[j]


def max_common_pair(G: Graph) -> Tuple[int, Optional[Tuple[int, int]]]:
    """
    Largest T_ij = #(N(i) ∩ N(j)) over unordered pairs i < j, with the
    lexicographically first pair attaining it. (0, None) when n < 2.
    """
    if G.n < 2:
        return 0, None
    A = G.open_matrix
    best = -1
    best_pair: Optional[Tuple[int, int]] = None
    for start, stop in row_blocks(G.n):
        counts = A[start:stop] @ A.T
        # only j > i
        rows = np.arange(start, stop)[:, None]
        cols = np.arange(G.n)[None, :]
        counts = np.where(cols > rows, counts, -1.0)
        flat = int(np.argmax(counts))
        value = int(counts.flat[flat])
        if value > best:
            best = value
            i, j = divmod(flat, G.n)
            best_pair = (start + i, j)
    return best, best_pair


# ----------------------------
# Degrees and connectivity
# ----------------------------

def degree_stats(G: Graph) -> DegreeStats:
    deg = G.degrees
    return DegreeStats(delta_max=int(deg.max()), delta_min=int(deg.min()))


def reachable_from(G: Graph, source: int = 0) -> Set[int]:
    check_vertex(G, source)
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in G.adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def is_connected(G: Graph) -> bool:
    return len(reachable_from(G, 0)) == G.n


def first_unreachable(G: Graph) -> Optional[int]:
    seen = reachable_from(G, 0)
    for v in range(G.n):
        if v not in seen:
            return v
    return None


# ----------------------------
# Edge-list I/O
# ----------------------------

def _parse_int(token: str, line: int) -> int:
    if not (token.isascii() and token.isdigit()):
        raise ParseError(f"expected a non-negative decimal integer, got {token!r}", line)
    return int(token)


def parse_edge_list(text: bytes | str) -> Graph:
    """
    Format: optional '#' comment lines, a header "n m", then exactly m lines "u v"
    with 0 <= u, v < n and u != v. Ids are 0-based. Blank lines are ignored.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as e:
            raise ParseError("non-ASCII byte in edge list", text.count(b"\n", 0, e.start) + 1)

    n: Optional[int] = None
    m = 0
    edges: List[Tuple[int, int]] = []
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2:
                raise ParseError(f"header must be 'n m', got {line!r}", lineno)
            n, m = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
            if n < 1:
                raise ParseError("vertex count must be >= 1", lineno)
            continue
        if len(edges) == m:
            raise ParseError(f"unexpected data after {m} edges: {line!r}", lineno)
        if len(parts) != 2:
            raise ParseError(f"edge line must be 'u v', got {line!r}", lineno)
        u, v = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
        if u >= n or v >= n:
            raise ParseError(f"endpoint of ({u}, {v}) outside [0, {n})", lineno)
        if u == v:
            raise ParseError(f"self-loop ({u}, {v})", lineno)
        edges.append((u, v))

    if n is None:
        raise ParseError("missing 'n m' header", last_line + 1)
    if len(edges) != m:
        raise ParseError(f"header announces {m} edges, found {len(edges)}", last_line + 1)
    return build_graph(n, edges)


def serialize_edge_list(G: Graph) -> bytes:
    edges = G.edges()
    lines = [f"{G.n} {len(edges)}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return ("\n".join(lines) + "\n").encode("ascii")


def read_graph(path: str | Path) -> Graph:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Graph file not found: {p}")
    return parse_edge_list(p.read_bytes())


def write_graph(G: Graph, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(serialize_edge_list(G))
