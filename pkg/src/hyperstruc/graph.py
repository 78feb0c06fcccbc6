"""Undirected simple graphs, hop-ring degree sequences and the experiment graphs.

Nodes carry contiguous internal ids ``0..n-1``; the original token of every
node is kept in ``Graph.labels`` so files can be written back with the ids the
user supplied.
"""

from __future__ import annotations

import io
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised for malformed graph or label input."""


@dataclass(frozen=True)
class Graph:
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.adjacency) != len(self.labels):
            raise GraphError("adjacency and labels differ in length")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.labels)})
        if len(self.index) != len(self.labels):
            raise GraphError("duplicate node labels")

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "Graph":
        """Build a graph from token pairs.

        Duplicate and reversed edges collapse; self-loops are dropped with a
        warning. Any node left without neighbours is rejected.
        """
        order: dict[str, int] = {}
        for t in nodes:
            order.setdefault(str(t), len(order))
        nbrs: list[set[int]] = [set() for _ in order]
        loops = 0
        for a, b in edges:
            a, b = str(a), str(b)
            for t in (a, b):
                if t not in order:
                    order[t] = len(order)
                    nbrs.append(set())
            if a == b:
                loops += 1
                continue
            nbrs[order[a]].add(order[b])
            nbrs[order[b]].add(order[a])
        if loops:
            logger.warning("dropped %d self-loop line(s)", loops)
        if not order:
            raise GraphError("graph is empty")
        isolated = [t for t, i in order.items() if not nbrs[i]]
        if isolated:
            raise GraphError(
                f"{len(isolated)} node(s) have degree 0 (e.g. {isolated[0]!r}); "
                "structural distances need every degree >= 1"
            )
        return cls(tuple(tuple(sorted(s)) for s in nbrs), tuple(order))


def load_edge_list(stream: TextIO) -> Graph:
    """Read a whitespace-separated edge list; lines starting with ``#`` are comments."""
    edges = []
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphError(f"line {lineno}: expected two node tokens, got {line!r}")
        edges.append((parts[0], parts[1]))
    return Graph.from_edges(edges)


def write_edge_list(g: Graph, stream: TextIO) -> None:
    for u, v in g.edges():
        stream.write(f"{g.labels[u]} {g.labels[v]}\n")


def read_edge_list_file(path) -> Graph:
    with open(path, encoding="utf-8") as f:
        return load_edge_list(f)


def load_labels(stream: TextIO, g: Graph) -> dict[int, int]:
    """Read ``token label`` lines into a map keyed by internal node id.

    A leading header line (unknown token, non-integer label) is skipped.
    """
    out: dict[int, int] = {}
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'node label', got {line!r}")
        token, raw = parts
        if not out and token not in g.index and not raw.lstrip("-").isdigit():
            continue  # column header such as "node label"
        if token not in g.index:
            raise GraphError(f"line {lineno}: label for unknown node {token!r}")
        try:
            label = int(raw)
        except ValueError:
            raise GraphError(f"line {lineno}: label {raw!r} is not an integer") from None
        u = g.index[token]
        if u in out:
            raise GraphError(f"line {lineno}: duplicate label for node {token!r}")
        out[u] = label
    classes = sorted(set(out.values()))
    if classes != list(range(len(classes))):
        raise GraphError(f"labels must form a contiguous range 0..C-1, got {classes}")
    return out


def write_labels(g: Graph, labels: dict[int, int], stream: TextIO) -> None:
    for u in sorted(labels):
        stream.write(f"{g.labels[u]} {labels[u]}\n")


@dataclass(frozen=True)
class HopRings:
    source: int
    rings: tuple[tuple[int, ...], ...]

    @property
    def eccentricity(self) -> int:
        return len(self.rings) - 1

    def ring(self, k: int) -> tuple[int, ...]:
        return self.rings[k] if k < len(self.rings) else ()


def bfs_distances(g: Graph, u: int) -> np.ndarray:
    """Shortest-path hop counts from ``u``; -1 marks unreachable nodes."""
    dist = np.full(g.node_count, -1, dtype=np.int64)
    dist[u] = 0
    queue = deque([u])
    adj = g.adjacency
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in adj[x]:
            if dist[y] < 0:
                dist[y] = dx
                queue.append(y)
    return dist


def hop_rings(g: Graph, u: int) -> HopRings:
    """Ascending degree sequences of the nodes at each exact hop distance from ``u``."""
    dist = bfs_distances(g, u)
    ecc = int(dist.max())
    buckets: list[list[int]] = [[] for _ in range(ecc + 1)]
    for v, d in enumerate(dist):
        if d >= 0:
            buckets[d].append(len(g.adjacency[v]))
    return HopRings(u, tuple(tuple(sorted(b)) for b in buckets))


def diameter(g: Graph) -> int:
    """Largest eccentricity; on disconnected graphs, the largest within any component."""
    return max(int(bfs_distances(g, u).max()) for u in range(g.node_count))


def generate_barbell(clique_size: int = 10, path_length: int = 10) -> tuple[Graph, dict[int, int]]:
    """Two ``clique_size`` cliques joined through a path of ``path_length`` nodes.

    Returns the graph and role labels given by automorphism orbits: class 0 is
    the clique interior, class 1 the two clique nodes touching the path, and
    classes 2.. the path nodes by distance from the nearer clique.
    """
    if clique_size < 3 or path_length < 1:
        raise GraphError("barbell needs clique_size >= 3 and path_length >= 1")
    c, p = clique_size, path_length
    n = 2 * c + p
    edges = []
    for base in (0, c + p):
        edges += [(base + i, base + j) for i in range(c) for j in range(i + 1, c)]
    chain = [c - 1, *range(c, c + p), c + p]
    edges += list(zip(chain, chain[1:]))
    g = Graph.from_edges(((str(a), str(b)) for a, b in edges), nodes=map(str, range(n)))

    roles = {}
    for u in range(c - 1):
        roles[u] = roles[c + p + 1 + u] = 0
    roles[c - 1] = roles[c + p] = 1
    for i in range(p):
        roles[c + i] = 2 + min(i, p - 1 - i)
    return g, roles


def karate_graph() -> Graph:
    """Zachary's karate club with 1-based node tokens ``1..34``."""
    import networkx as nx

    kc = nx.karate_club_graph()
    return Graph.from_edges(
        ((str(a + 1), str(b + 1)) for a, b in kc.edges()),
        nodes=(str(u + 1) for u in sorted(kc.nodes())),
    )


def mirror_token(token: str, offset: int) -> str:
    try:
        return str(int(token) + offset)
    except ValueError:
        return f"{token}'"


def generate_mirrored(
    g: Graph, bridges: Iterable[tuple[int, int]], offset: int | None = None
) -> tuple[Graph, list[tuple[int, int]]]:
    """Disjoint union of ``g`` with a copy, plus one edge per bridge.

    A bridge ``(u, w)`` (internal ids of ``g``) joins ``u`` in the original to
    the copy of ``w``. Integer tokens of the copy are shifted by ``offset``
    (default ``node_count + 2``, which maps karate node 1 onto 37); other tokens get a trailing prime.

    Returns the new graph and the ``(node, mirror)`` pairs as new internal ids.
    """
    n = g.node_count
    if offset is None:
        offset = n + 2
    copy_tokens = [mirror_token(t, offset) for t in g.labels]
    clash = set(copy_tokens) & set(g.labels)
    if clash:
        raise GraphError(f"mirror tokens collide with originals: {sorted(clash)[:3]}")
    edges = [(g.labels[u], g.labels[v]) for u, v in g.edges()]
    edges += [(copy_tokens[u], copy_tokens[v]) for u, v in g.edges()]
    for u, w in bridges:
        if not (0 <= u < n and 0 <= w < n):
            raise GraphError(f"bridge ({u}, {w}) out of range")
        edges.append((g.labels[u], copy_tokens[w]))
    out = Graph.from_edges(edges, nodes=[*g.labels, *copy_tokens])
    return out, [(u, u + n) for u in range(n)]


def mirrored_karate() -> tuple[Graph, list[tuple[int, int]]]:
    """Two karate copies (tokens 1..34 and 37..70) bridged by the edge 1-37."""
    kc = karate_graph()
    one = kc.index["1"]
    return generate_mirrored(kc, [(one, one)])


def edge_list_text(g: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()
