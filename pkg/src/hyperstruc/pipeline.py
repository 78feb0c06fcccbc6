"""End-to-end embedding: distances, multilayer graph, walks, pairs, training."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .multilayer import MultilayerGraph, build_multilayer
from .structdist import StructuralDistanceTable, all_pair_distances, cached_distances
from .trainer import TrainConfig, train
from .walker import PairMultiset, WalkConfig, extract_pairs, generate_corpus

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


@dataclass
class EmbeddingRun:
    embedding: np.ndarray
    table: StructuralDistanceTable
    multilayer: MultilayerGraph
    corpus: list[list[int]]
    pairs: PairMultiset
    timings: dict[str, float] = field(default_factory=dict)
    batch_losses: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)


def embed_graph(
    g: Graph,
    walk_cfg: WalkConfig | None = None,
    train_cfg: TrainConfig | None = None,
    radius: int = 1,
    cache_dir=None,
) -> EmbeddingRun:
    walk_cfg = walk_cfg or WalkConfig()
    train_cfg = train_cfg or TrainConfig()
    timings: dict[str, float] = {}

    def stage(name, fn, *args):
        t0 = time.perf_counter()
        try:
            out = fn(*args)
        except Exception as exc:
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        logger.info("%s: %.2fs", name, timings[name])
        return out

    if cache_dir is None:
        table = stage("distances", all_pair_distances, g, radius)
    else:
        table = stage("distances", cached_distances, g, radius, cache_dir)
    mg = stage("multilayer", build_multilayer, table)
    corpus = stage("walks", generate_corpus, mg, walk_cfg)
    pairs = stage("pairs", extract_pairs, corpus, walk_cfg.window_radius, g.node_count)

    batch_losses: list[float] = []
    epoch_losses: list[float] = []
    current: list[float] = []

    def record(epoch, batch, loss, emb):
        if batch == 0 and current:
            epoch_losses.append(float(np.mean(current)))
            current.clear()
        current.append(loss)
        batch_losses.append(loss)

    emb = stage("training", train, pairs, train_cfg, np.random.default_rng(train_cfg.rng_seed), record)
    if current:
        epoch_losses.append(float(np.mean(current)))
    return EmbeddingRun(emb, table, mg, corpus, pairs, timings, batch_losses, epoch_losses)
