"""Weighted multilayer context graph and its random-walk transition rule.

Layer ``k`` is a complete graph over the nodes whose pair weights decay with
the layer-``k`` structural distance. Each node is also linked to its own copy
in the neighbouring layers: the up-link grows with the number of nodes that
look unusually similar at this layer, the down-link has unit weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .structdist import StructuralDistanceTable


@dataclass(frozen=True)
class WalkState:
    node: int
    layer: int


@dataclass
class MultilayerGraph:
    weights: np.ndarray  # (layers, n, n); 0 for absent pairs and the diagonal
    layer_average: np.ndarray  # (layers,)
    similar_counts: np.ndarray  # (layers, n)
    up_weights: np.ndarray  # (layers, n); nan on the top layer
    down_weights: np.ndarray  # (layers, n); nan on layer 0
    active: np.ndarray  # (layers, n); node has a defined distance at that layer

    @property
    def layer_count(self) -> int:
        return self.weights.shape[0]

    @property
    def node_count(self) -> int:
        return self.weights.shape[1]

    def similar_count(self, u: int, k: int) -> int:
        return int(self.similar_counts[k, u])

    def layer_move_weights(self, s: WalkState) -> tuple[float, float]:
        """``(up, down)`` weights; an impossible direction, or a node absent there, gets 0."""
        k, u = s.layer, s.node
        up = 0.0
        if k + 1 < self.layer_count and self.present(u, k + 1):
            up = float(self.up_weights[k, u])
        down = float(self.down_weights[k, u]) if k > 0 else 0.0
        return up, down

    def present(self, u: int, k: int) -> bool:
        return bool(self.active[k, u])


def build_multilayer(table: StructuralDistanceTable) -> MultilayerGraph:
    """Edge weights ``exp(-distance)``, per-layer averages, similar counts, layer links."""
    dist = table.distances
    layers, n = dist.shape[0], dist.shape[1]
    if n < 3:
        raise ValueError("the multilayer graph needs at least 3 nodes")
    eligible = ~np.isnan(dist)
    weights = np.where(eligible, np.exp(-np.where(eligible, dist, 0.0)), 0.0)
    idx = np.arange(n)
    weights[:, idx, idx] = 0.0

    pairs = n * (n - 1) / 2
    avg = np.array([np.triu(w, 1).sum() / pairs for w in weights])
    counts = (weights > avg[:, None, None]).sum(axis=2)

    # u exists in layer k when its self-distance is defined there
    active = eligible[:, idx, idx]
    up = np.full((layers, n), np.nan)
    down = np.full((layers, n), np.nan)
    up[:-1] = np.where(active[:-1], np.log(counts[:-1] + math.e), np.nan)
    down[1:] = np.where(active[1:], 1.0, np.nan)
    return MultilayerGraph(weights, avg, counts, up, down, active)


def similar_count(mg: MultilayerGraph, u: int, k: int) -> int:
    """Number of nodes whose layer-``k`` weight to ``u`` exceeds the layer average."""
    return mg.similar_count(u, k)


def move_probabilities(mg: MultilayerGraph, s: WalkState, alpha: float) -> tuple[float, float, float]:
    """``(stay, up, down)`` probability masses for one step from ``s``.

    Staying keeps ``1 - alpha``; the ``alpha`` layer-change mass is split in
    proportion to the up/down weights and falls entirely on the only available
    direction at the boundary layers. A node without partners in its layer
    spends all of its mass on layer moves, and vice versa.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    has_partner = bool(mg.weights[s.layer, s.node].any())
    up_w, down_w = mg.layer_move_weights(s)
    move_total = up_w + down_w
    if not has_partner and move_total == 0.0:
        raise ValueError(f"walk state {s} has no outgoing transition")
    if move_total == 0.0:
        return 1.0, 0.0, 0.0
    stay, layer_mass = (1.0 - alpha, alpha) if has_partner else (0.0, 1.0)
    # a single available direction takes the whole mass, without rounding
    if down_w == 0.0:
        return stay, layer_mass, 0.0
    if up_w == 0.0:
        return stay, 0.0, layer_mass
    return stay, layer_mass * up_w / move_total, layer_mass * down_w / move_total


def transition_distribution(mg: MultilayerGraph, s: WalkState, alpha: float) -> dict[WalkState, float]:
    """Full next-state distribution from ``s`` (zero-probability states omitted)."""
    stay, up, down = move_probabilities(mg, s, alpha)
    out: dict[WalkState, float] = {}
    if stay > 0.0:
        row = mg.weights[s.layer, s.node]
        total = row.sum()
        for v in np.flatnonzero(row):
            out[WalkState(int(v), s.layer)] = stay * float(row[v]) / total
    if up > 0.0:
        out[WalkState(s.node, s.layer + 1)] = up
    if down > 0.0:
        out[WalkState(s.node, s.layer - 1)] = down
    return out


def dump_weights(mg: MultilayerGraph, stream, labels=None) -> None:
    """Text dump of every non-zero intra-layer weight, for inspection."""
    n = mg.node_count
    names = labels or [str(i) for i in range(n)]
    for k in range(mg.layer_count):
        stream.write(f"# layer {k} average {float(mg.layer_average[k])!r}\n")
        iu, iv = np.nonzero(np.triu(mg.weights[k], 1))
        for u, v in zip(iu, iv):
            stream.write(f"{k} {names[u]} {names[v]} {float(mg.weights[k, u, v])!r}\n")
