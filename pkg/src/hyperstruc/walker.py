"""Layer-aware random walks over the multilayer graph and window pair extraction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .multilayer import MultilayerGraph, WalkState, move_probabilities


@dataclass
class WalkConfig:
    walks_per_node: int = 8
    walk_length: int = 10
    alpha: float = 0.7
    window_radius: int = 3
    max_step_budget_factor: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("walks_per_node", "walk_length", "window_radius", "max_step_budget_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


class _StepTable:
    """Per-state move masses and intra-layer CDFs, computed lazily."""

    def __init__(self, mg: MultilayerGraph, alpha: float):
        self.mg = mg
        self.alpha = alpha
        self._moves: dict[tuple[int, int], tuple[float, float, float]] = {}
        self._cdf: dict[tuple[int, int], np.ndarray] = {}

    def moves(self, u: int, k: int) -> tuple[float, float, float]:
        key = (u, k)
        if key not in self._moves:
            self._moves[key] = move_probabilities(self.mg, WalkState(u, k), self.alpha)
        return self._moves[key]

    def cdf(self, u: int, k: int) -> np.ndarray:
        key = (u, k)
        c = self._cdf.get(key)
        if c is None:
            c = np.cumsum(self.mg.weights[k, u])
            self._cdf[key] = c
        return c


def _walk(table: _StepTable, start: int, length: int, budget: int, rng: np.random.Generator) -> list[int]:
    u, k = start, 0
    seq = [start]
    steps = 0
    while len(seq) < length and steps < budget:
        steps += 1
        stay, up, _ = table.moves(u, k)
        r = rng.random()
        if r < stay:
            cdf = table.cdf(u, k)
            v = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            u = min(v, cdf.size - 1)
            seq.append(u)
        elif r < stay + up:
            k += 1
        else:
            k -= 1
    return seq


def walk_rng(seed: int, node: int, walk_index: int) -> np.random.Generator:
    """Independent stream for one walk, fixed by ``(seed, node, walk_index)``."""
    return np.random.default_rng([seed, node, walk_index])


def random_walk(mg: MultilayerGraph, start: int, cfg: WalkConfig, rng: np.random.Generator) -> list[int]:
    """One walk from ``(start, layer 0)``; layer changes emit nothing.

    Stops after ``walk_length`` emitted nodes or ``walk_length *
    max_step_budget_factor`` steps, whichever comes first.
    """
    table = _StepTable(mg, cfg.alpha)
    return _walk(table, start, cfg.walk_length, cfg.walk_length * cfg.max_step_budget_factor, rng)


def generate_corpus(mg: MultilayerGraph, cfg: WalkConfig) -> list[list[int]]:
    table = _StepTable(mg, cfg.alpha)
    budget = cfg.walk_length * cfg.max_step_budget_factor
    corpus = []
    for w in range(cfg.walks_per_node):
        for u in range(mg.node_count):
            corpus.append(_walk(table, u, cfg.walk_length, budget, walk_rng(cfg.rng_seed, u, w)))
    return corpus


@dataclass
class PairMultiset:
    """Positive pairs with multiplicities and second-position node frequencies."""

    pairs: np.ndarray  # (P, 2) distinct ordered pairs, lexicographically sorted
    counts: np.ndarray  # (P,)
    node_count: int
    freq: np.ndarray = field(init=False)

    def __post_init__(self):
        self.freq = np.bincount(self.pairs[:, 1], weights=self.counts, minlength=self.node_count).astype(np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def multiplicity(self, u: int, v: int) -> int:
        hit = np.flatnonzero((self.pairs[:, 0] == u) & (self.pairs[:, 1] == v))
        return int(self.counts[hit[0]]) if hit.size else 0

    def as_counter(self) -> Counter:
        return Counter({(int(u), int(v)): int(c) for (u, v), c in zip(self.pairs, self.counts)})

    def positive_mask(self) -> np.ndarray:
        """Dense ``(n, n)`` boolean matrix of pairs present in the multiset."""
        mask = np.zeros((self.node_count, self.node_count), dtype=bool)
        mask[self.pairs[:, 0], self.pairs[:, 1]] = True
        return mask

    def expanded(self) -> np.ndarray:
        """Every pair repeated by its multiplicity, ``(total, 2)``."""
        return np.repeat(self.pairs, self.counts, axis=0)


def extract_pairs(corpus: Sequence[Sequence[int]], window_radius: int, node_count: int | None = None) -> PairMultiset:
    """All ordered pairs within ``window_radius`` positions, excluding self-pairs."""
    if window_radius < 1:
        raise ValueError("window_radius must be >= 1")
    counter: Counter = Counter()
    for seq in corpus:
        for i, u in enumerate(seq):
            for j in range(max(0, i - window_radius), min(len(seq), i + window_radius + 1)):
                if j != i and seq[j] != u:
                    counter[(u, seq[j])] += 1
    if node_count is None:
        node_count = 1 + max((max(s) for s in corpus if s), default=-1)
    keys = sorted(counter)
    pairs = np.array(keys, dtype=np.int64).reshape(-1, 2)
    counts = np.array([counter[k] for k in keys], dtype=np.int64)
    return PairMultiset(pairs, counts, node_count)


def write_corpus(corpus, labels: Sequence[str], stream) -> None:
    for seq in corpus:
        stream.write(" ".join(labels[u] for u in seq) + "\n")
