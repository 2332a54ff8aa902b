"""Undirected simple graphs, topology generators and cover utilities.

Nodes are dense integer indices ``0..n-1``. Edges are stored as canonical
``(min, max)`` pairs in sorted order so that iteration, sampling and greedy
tie-breaking are reproducible.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

MAX_ER_REDRAWS = 10_000


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph with at least one edge."""

    n: int
    edges: tuple[tuple[int, int], ...]
    name: str = ""
    adjacency: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"graph needs at least 2 nodes, got n={self.n}")
        canon = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            e = (min(i, j), max(i, j))
            if e in canon:
                raise ValueError(f"parallel edge {e}")
            canon.add(e)
        if not canon:
            raise ValueError("graph needs at least one edge")
        edges = tuple(sorted(canon))
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in edges:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "adjacency", tuple(frozenset(a) for a in adj))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(a) for a in self.adjacency], dtype=np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(|E|, 2)`` integer array of endpoints."""
        a = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        a.setflags(write=False)
        return a

    @cached_property
    def active_nodes(self) -> tuple[int, ...]:
        """Nodes with positive degree."""
        return tuple(i for i in range(self.n) if self.adjacency[i])

    def degree(self, i: int) -> int:
        self._check_node(i)
        return len(self.adjacency[i])

    def neighbors(self, i: int) -> frozenset[int]:
        self._check_node(i)
        return self.adjacency[i]

    def is_complete(self) -> bool:
        return self.num_edges == self.n * (self.n - 1) // 2

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return Graph(self.n, tuple((perm[i], perm[j]) for i, j in self.edges), self.name)

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for n={self.n}")


@dataclass(frozen=True)
class BipartitePartition:
    part1: frozenset[int]
    part2: frozenset[int]

    def validate(self, g: Graph) -> None:
        if self.part1 & self.part2:
            raise ValueError("partition sides overlap")
        if self.part1 | self.part2 != frozenset(range(g.n)):
            raise ValueError("partition does not cover every node")
        for i, j in g.edges:
            if (i in self.part1) == (j in self.part1):
                raise ValueError(f"edge ({i}, {j}) lies inside one side")


def _two_color(g: Graph):
    """BFS 2-coloring. Returns ``(color, parent, conflict_edge)``."""
    color = [-1] * g.n
    parent = [-1] * g.n
    for root in range(g.n):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in sorted(g.adjacency[v]):
                if color[w] == -1:
                    color[w] = 1 - color[v]
                    parent[w] = v
                    queue.append(w)
                elif color[w] == color[v]:
                    return color, parent, (v, w)
    return color, parent, None


def bipartite_partition(g: Graph) -> BipartitePartition | None:
    """Return the bipartition of ``g``, or ``None`` if it has an odd cycle.

    The lowest-indexed node of every connected component (and so every
    isolated node) lands in ``part1``.
    """
    color, _, conflict = _two_color(g)
    if conflict is not None:
        return None
    part1 = frozenset(i for i in range(g.n) if color[i] == 0)
    return BipartitePartition(part1, frozenset(range(g.n)) - part1)


def find_odd_cycle(g: Graph) -> list[int] | None:
    """Node sequence of some odd cycle in ``g``, or ``None`` when bipartite."""
    _, parent, conflict = _two_color(g)
    if conflict is None:
        return None
    v, w = conflict

    def path_to_root(x):
        path = [x]
        while parent[x] != -1:
            x = parent[x]
            path.append(x)
        return path

    pv, pw = path_to_root(v), path_to_root(w)
    on_pw = set(pw)
    lca = next(x for x in pv if x in on_pw)
    left = pv[: pv.index(lca) + 1]
    right = pw[: pw.index(lca)]
    return left + right[::-1]


def edges_covered(g: Graph, nodes: Iterable[int]) -> int:
    """Number of edges with at least one endpoint in ``nodes``."""
    s = set()
    for i in nodes:
        g._check_node(i)
        s.add(i)
    return sum(1 for i, j in g.edges if i in s or j in s)


def vertex_cover_complement(g: Graph, k: int) -> frozenset[int]:
    """The vertex cover ``V \\ {k}``."""
    g._check_node(k)
    return frozenset(range(g.n)) - {k}


# generators ---------------------------------------------------------------

def star(n: int) -> Graph:
    _check_n(n, 2)
    return Graph(n, tuple((0, i) for i in range(1, n)), f"star:{n}")


def ring(n: int) -> Graph:
    _check_n(n, 3)
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)), f"ring:{n}")


def line(n: int) -> Graph:
    _check_n(n, 2)
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)), f"line:{n}")


def complete(n: int) -> Graph:
    _check_n(n, 2)
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), f"complete:{n}")


def sample_erdos_renyi(n: int, p: float, seed: int) -> tuple[Graph, int]:
    """Draw G(n, p), redrawing empty graphs. Returns ``(graph, redraws)``.

    Attempt ``k`` uses the substream ``default_rng([seed, k])``, so the
    result is a pure function of ``(n, p, seed)``.
    """
    _check_n(n, 2)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        raise ValueError("p = 0 cannot produce an edge")
    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(MAX_ER_REDRAWS):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(iu.size) < p
        if keep.any():
            edges = tuple(zip(iu[keep].tolist(), ju[keep].tolist()))
            return Graph(n, edges, f"er:{n}:{p:g}:{seed}"), attempt
    raise RuntimeError(f"no edge after {MAX_ER_REDRAWS} draws of G({n}, {p})")


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    g, redraws = sample_erdos_renyi(n, p, seed)
    if redraws:
        log.info("G(%d, %g) seed=%d redrawn %d time(s) to get an edge", n, p, seed, redraws)
    return g


def random_bipartite(n1: int, n2: int, p: float, seed: int) -> Graph:
    """Random bipartite graph on sides ``0..n1-1`` and ``n1..n1+n2-1``."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both sides need at least one node")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    for attempt in range(MAX_ER_REDRAWS):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random((n1, n2)) < p
        if keep.any():
            a, b = np.nonzero(keep)
            edges = tuple(zip(a.tolist(), (b + n1).tolist()))
            return Graph(n1 + n2, edges, f"bip:{n1}:{n2}:{p:g}:{seed}")
    raise RuntimeError("could not draw a nonempty bipartite graph")


def _check_n(n: int, lo: int) -> None:
    if int(n) != n or n < lo:
        raise ValueError(f"n must be an integer >= {lo}, got {n}")


def parse_graph_spec(spec: str, seed: int = 0) -> Graph:
    """Build a graph from ``star:6``, ``ring:6``, ``line:5``, ``complete:100``,
    ``er:100:0.3`` or ``file:PATH``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "file":
            return read_edge_list(rest)
        args = rest.split(":") if rest else []
        if kind in ("star", "ring", "line", "complete") and len(args) == 1:
            return {"star": star, "ring": ring, "line": line, "complete": complete}[kind](int(args[0]))
        if kind == "er" and len(args) == 2:
            return erdos_renyi(int(args[0]), float(args[1]), seed)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad graph spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown graph spec {spec!r}")


# edge-list text format ----------------------------------------------------

def parse_edge_list(text: str, name: str = "") -> Graph:
    """Parse whitespace-separated ``i j`` lines.

    ``#`` starts a comment. A ``n <count>`` header fixes the node count,
    otherwise it is ``max index + 1``. If any token is not an integer, all
    tokens are treated as names and mapped to indices in order of first
    appearance.
    """
    header_n = None
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if not body:
            continue
        if body[0] == "n" and len(body) == 2:
            header_n = int(body[1])
            continue
        if len(body) != 2:
            raise ValueError(f"line {lineno}: expected 'i j', got {raw.strip()!r}")
        pairs.append((body[0], body[1]))

    def is_int(tok):
        try:
            return int(tok) >= 0
        except ValueError:
            return False

    if all(is_int(a) and is_int(b) for a, b in pairs):
        edges = [(int(a), int(b)) for a, b in pairs]
        n = max((max(e) for e in edges), default=-1) + 1
    else:
        index: dict[str, int] = {}
        for a, b in pairs:
            index.setdefault(a, len(index))
            index.setdefault(b, len(index))
        edges = [(index[a], index[b]) for a, b in pairs]
        n = len(index)
    if header_n is not None:
        if header_n < n:
            raise ValueError(f"header n={header_n} smaller than node indices used ({n})")
        n = header_n
    return Graph(n, tuple(edges), name)


def read_edge_list(path: str | Path) -> Graph:
    path = Path(path)
    return parse_edge_list(path.read_text(), f"file:{path}")


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"] + [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"
