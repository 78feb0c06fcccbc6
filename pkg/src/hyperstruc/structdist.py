"""Structural distances between nodes from their hop-ring degree sequences.

Two degrees are compared by their ratio (``max/min - 1``), sequences by
dynamic time warping, and node pairs by summing the warping cost over hop
levels ``0..k``. FastDTW (multi-resolution DTW with a search radius) keeps the
per-pair cost linear in the sequence length.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .graph import Graph, diameter, hop_rings

logger = logging.getLogger(__name__)

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"


@numba.njit(cache=True, inline="always")
def _cost(a, b):
    if a >= b:
        return a / b - 1.0
    return b / a - 1.0


def dtw_cost(a: float, b: float) -> float:
    """Relative degree difference ``max(a, b) / min(a, b) - 1``."""
    if a <= 0 or b <= 0:
        raise ValueError("degrees must be positive")
    return max(a, b) / min(a, b) - 1.0


def exact_dtw(seq_a, seq_b) -> float:
    """Full dynamic-programming DTW under the degree-ratio cost."""
    a = np.asarray(seq_a, dtype=np.float64)
    b = np.asarray(seq_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW needs non-empty sequences")
    return float(_exact_dtw(a, b))


@numba.njit(cache=True)
def _exact_dtw(a, b):
    n, m = a.size, b.size
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = _cost(a[i - 1], b[j - 1]) + best
    return D[n, m]


@numba.njit(cache=True)
def _window_dtw(a, b, lo, hi, want_path):
    """DTW restricted to cells ``lo[i] <= j <= hi[i]`` of each row ``i``.

    Cells are stored row by row in one flat buffer. Returns the cost and,
    if requested, the warping path as an ``(L, 2)`` array from start to end.
    """
    n, m = a.size, b.size
    off = np.empty(n + 1, dtype=np.int64)
    off[0] = 0
    for i in range(n):
        off[i + 1] = off[i] + (hi[i] - lo[i] + 1)
    D = np.empty(off[n])
    inf = np.inf
    for i in range(n):
        for j in range(lo[i], hi[i] + 1):
            c = _cost(a[i], b[j])
            if i == 0 and j == 0:
                D[off[0]] = c
                continue
            best = inf
            if i > 0:
                if lo[i - 1] <= j <= hi[i - 1]:
                    v = D[off[i - 1] + j - lo[i - 1]]
                    if v < best:
                        best = v
                if lo[i - 1] <= j - 1 <= hi[i - 1]:
                    v = D[off[i - 1] + j - 1 - lo[i - 1]]
                    if v < best:
                        best = v
            if j - 1 >= lo[i]:
                v = D[off[i] + j - 1 - lo[i]]
                if v < best:
                    best = v
            D[off[i] + j - lo[i]] = c + best
    total = D[off[n - 1] + m - 1 - lo[n - 1]]
    if not want_path:
        return total, np.empty((0, 2), dtype=np.int64)

    path = np.empty((n + m, 2), dtype=np.int64)
    i, j = n - 1, m - 1
    L = 0
    path[L, 0] = i
    path[L, 1] = j
    L += 1
    while i > 0 or j > 0:
        bi, bj = -1, -1
        best = inf
        if i > 0 and j > 0 and lo[i - 1] <= j - 1 <= hi[i - 1]:
            v = D[off[i - 1] + j - 1 - lo[i - 1]]
            if v < best:
                best, bi, bj = v, i - 1, j - 1
        if i > 0 and lo[i - 1] <= j <= hi[i - 1]:
            v = D[off[i - 1] + j - lo[i - 1]]
            if v < best:
                best, bi, bj = v, i - 1, j
        if j > 0 and j - 1 >= lo[i]:
            v = D[off[i] + j - 1 - lo[i]]
            if v < best:
                best, bi, bj = v, i, j - 1
        i, j = bi, bj
        path[L, 0] = i
        path[L, 1] = j
        L += 1
    return total, path[:L][::-1].copy()


@numba.njit(cache=True)
def _halve(x):
    out = np.empty(x.size // 2)
    for i in range(out.size):
        out[i] = 0.5 * (x[2 * i] + x[2 * i + 1])
    return out


@numba.njit(cache=True)
def _expand_window(path, n, m, radius):
    """Project a coarse path to the finer grid, widened by ``radius`` coarse cells."""
    lo = np.full(n, m, dtype=np.int64)
    hi = np.full(n, -1, dtype=np.int64)
    for p in range(path.shape[0]):
        ci, cj = path[p, 0], path[p, 1]
        r0 = 2 * (ci - radius)
        r1 = 2 * (ci + radius) + 1
        c0 = 2 * (cj - radius)
        c1 = 2 * (cj + radius) + 1
        if r0 < 0:
            r0 = 0
        if r1 > n - 1:
            r1 = n - 1
        if c0 < 0:
            c0 = 0
        if c1 > m - 1:
            c1 = m - 1
        for r in range(r0, r1 + 1):
            if c0 < lo[r]:
                lo[r] = c0
            if c1 > hi[r]:
                hi[r] = c1
    # dropped odd tails and radius 0 can leave rows uncovered or disconnected
    lo[0] = 0
    hi[n - 1] = m - 1
    for i in range(n):
        if lo[i] > m - 1:
            lo[i] = m - 1
    for i in range(1, n):
        if hi[i] < hi[i - 1]:
            hi[i] = hi[i - 1]
    for i in range(n - 2, -1, -1):
        if lo[i] > lo[i + 1]:
            lo[i] = lo[i + 1]
    for i in range(1, n):
        if lo[i] > hi[i - 1] + 1:
            lo[i] = hi[i - 1] + 1
    for i in range(n):
        if hi[i] < lo[i]:
            hi[i] = lo[i]
    return lo, hi


@numba.njit(cache=True)
def _fast_dtw(a, b, radius):
    min_size = radius + 2
    # coarsening pyramid, finest level first
    levels_a = [a]
    levels_b = [b]
    while levels_a[-1].size >= min_size and levels_b[-1].size >= min_size:
        levels_a.append(_halve(levels_a[-1]))
        levels_b.append(_halve(levels_b[-1]))
    top = len(levels_a) - 1
    x, y = levels_a[top], levels_b[top]
    lo = np.zeros(x.size, dtype=np.int64)
    hi = np.full(x.size, y.size - 1, dtype=np.int64)
    total, path = _window_dtw(x, y, lo, hi, top > 0)
    for lvl in range(top - 1, -1, -1):
        x, y = levels_a[lvl], levels_b[lvl]
        lo, hi = _expand_window(path, x.size, y.size, radius)
        total, path = _window_dtw(x, y, lo, hi, lvl > 0)
    return total


def fast_dtw(seq_a, seq_b, radius: int = 1) -> float:
    """Approximate DTW by coarsening, solving, and refining within ``radius``.

    Sequences shorter than ``radius + 2`` are solved exactly, so any radius at
    least as long as both sequences reproduces :func:`exact_dtw`.
    """
    a = np.asarray(seq_a, dtype=np.float64)
    b = np.asarray(seq_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("DTW needs non-empty sequences")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return float(_fast_dtw(a, b, int(radius)))


@numba.njit(cache=True, parallel=True)
def _pairwise_sequence_dtw(flat, ptr, radius):
    """Symmetric FastDTW matrix between the sequences ``flat[ptr[i]:ptr[i+1]]``."""
    u = ptr.size - 1
    out = np.zeros((u, u))
    for i in numba.prange(u):
        a = flat[ptr[i] : ptr[i + 1]]
        for j in range(i + 1, u):
            d = _fast_dtw(a, flat[ptr[j] : ptr[j + 1]], radius)
            out[i, j] = d
            out[j, i] = d
    return out


@dataclass
class StructuralDistanceTable:
    """Cumulative structural distances per layer.

    ``distances[k, u, v]`` is the distance at layer ``k``; ``nan`` marks pairs
    that are not defined at that layer because one of the two nodes has no
    nodes at hop distance ``k``.
    """

    distances: np.ndarray

    @property
    def layer_count(self) -> int:
        return self.distances.shape[0]

    @property
    def node_count(self) -> int:
        return self.distances.shape[1]

    def distance(self, k: int, u: int, v: int) -> float | None:
        d = self.distances[k, u, v]
        return None if np.isnan(d) else float(d)

    def eligible(self, k: int) -> np.ndarray:
        return ~np.isnan(self.distances[k])

    def save(self, path) -> None:
        np.save(Path(path), self.distances, allow_pickle=False)

    @classmethod
    def load(cls, path) -> "StructuralDistanceTable":
        return cls(np.load(Path(path), allow_pickle=False))


def all_pair_distances(g: Graph, radius: int = 1, diam: int | None = None) -> StructuralDistanceTable:
    """Structural distance of every node pair at every layer ``0..diameter``.

    Identical hop rings are solved once per layer; every distinct pair of
    rings is compared, so the result equals a direct per-pair evaluation.
    """
    n = g.node_count
    if diam is None:
        diam = diameter(g)
    rings = [hop_rings(g, u).rings for u in range(n)]
    layers = diam + 1
    dist = np.full((layers, n, n), np.nan)
    prev = None
    for k in range(layers):
        ids = np.full(n, -1, dtype=np.int64)
        uniq: dict[tuple[int, ...], int] = {}
        for u in range(n):
            if k < len(rings[u]):
                ids[u] = uniq.setdefault(rings[u][k], len(uniq))
        seqs = list(uniq)
        ptr = np.zeros(len(seqs) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(s) for s in seqs])
        flat = np.fromiter((d for s in seqs for d in s), dtype=np.float64, count=int(ptr[-1]))
        seq_d = _pairwise_sequence_dtw(flat, ptr, int(radius))

        active = ids >= 0
        layer = np.full((n, n), np.nan)
        sub = np.ix_(active, active)
        layer[sub] = seq_d[np.ix_(ids[active], ids[active])]
        if prev is not None:
            layer = layer + prev  # nan from an absent earlier layer propagates
        dist[k] = layer
        prev = layer
        logger.debug("layer %d: %d active nodes, %d distinct rings", k, int(active.sum()), len(seqs))
    return StructuralDistanceTable(dist)


def edge_list_hash(g: Graph, radius: int) -> str:
    h = hashlib.sha256()
    for u, v in g.edges():
        h.update(f"{g.labels[u]} {g.labels[v]}\n".encode())
    h.update(f"radius={radius}".encode())
    return h.hexdigest()[:20]


def cached_distances(g: Graph, radius: int, cache_dir) -> StructuralDistanceTable:
    """Load the distance table from ``cache_dir`` if present, else compute and store it."""
    path = Path(cache_dir) / f"structdist-{edge_list_hash(g, radius)}.npy"
    if path.exists():
        logger.info("loading structural distances from %s", path)
        return StructuralDistanceTable.load(path)
    table = all_pair_distances(g, radius)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table
