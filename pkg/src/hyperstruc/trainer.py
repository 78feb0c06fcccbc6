"""Riemannian SGD on the hyperboloid with a negative-sampling softmax loss.

For a positive pair ``(u, v)`` and negatives ``v'_1..v'_M`` the loss is

    -log( exp(-d(u, v)^2) / (exp(-d(u, v)^2) + sum_i exp(-d(u, v'_i)^2)) )

with ``d`` the hyperbolic distance. Gradients are taken in the ambient space,
turned into Minkowski gradients, projected onto the tangent space of each
point and applied with the exponential map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import manifold
from .walker import PairMultiset

logger = logging.getLogger(__name__)

# below this gap the closed form of d(arccosh(g)^2)/dg is replaced by its series
SERIES_GAP = 1e-7


@dataclass
class TrainConfig:
    dim: int = 10
    negatives: int = 20
    learning_rate: float = 1.0
    batch_size: int = 50
    epochs: int = 5
    init_scale: float = 1e-3
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("dim", "negatives", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def init_embeddings(node_count: int, cfg: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Spatial coordinates uniform in ``[-init_scale, init_scale]``, lifted onto the sheet."""
    x = np.zeros((node_count, cfg.dim + 1))
    x[:, :-1] = rng.uniform(-cfg.init_scale, cfg.init_scale, size=(node_count, cfg.dim))
    return manifold.repair(x)


class NegativeSampler:
    """Draws nodes with probability proportional to their frequency in the positive multiset.

    Candidates that are ``u`` itself or already paired with ``u`` are rejected
    and redrawn.
    """

    def __init__(self, pm: PairMultiset):
        self.freq = pm.freq.astype(np.float64)
        self.cdf = np.cumsum(self.freq)
        self.total = self.cdf[-1]
        self.positive = pm.positive_mask()
        eligible = self.total - self.positive @ self.freq - self.freq
        self.eligible_mass = np.where(self.positive.any(axis=1), eligible, self.total - self.freq)
        self.sources = np.unique(pm.pairs[:, 0])

    def check(self, sources: np.ndarray) -> None:
        sources = np.asarray(sources)
        starved = np.unique(sources[self.eligible_mass[sources] <= 0])
        if starved.size:
            raise ValueError(
                f"{starved.size} node(s) (e.g. id {int(starved[0])}) have no eligible negatives: "
                "every frequent node already co-occurs with them; use a smaller window or a larger graph"
            )

    def _draw(self, shape, rng) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.random(shape) * self.total, side="right")
        return np.minimum(idx, self.cdf.size - 1)

    def sample(self, sources: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
        sources = np.asarray(sources, dtype=np.int64)
        self.check(sources)
        out = self._draw((sources.size, m), rng)
        src = np.broadcast_to(sources[:, None], out.shape)
        bad = self.positive[src, out] | (out == src)
        while bad.any():
            redraw = self._draw(int(bad.sum()), rng)
            out[bad] = redraw
            bad[bad] = self.positive[src[bad], redraw] | (redraw == src[bad])
        return out


def sample_negatives(u: int, pm: PairMultiset, m: int, rng: np.random.Generator) -> list[int]:
    """``m`` negatives for source ``u`` (with replacement)."""
    return NegativeSampler(pm).sample(np.array([u]), m, rng)[0].tolist()


def _dsq_dgamma(gamma: np.ndarray) -> np.ndarray:
    """Derivative of ``arccosh(g)^2`` with respect to ``g``, finite at ``g = 1``."""
    gap = gamma - 1.0
    near = gap < SERIES_GAP
    g = np.where(near, 2.0, gamma)
    closed = 2.0 * np.arccosh(g) / np.sqrt(g * g - 1.0)
    series = 2.0 * (1.0 - np.maximum(gap, 0.0) / 3.0)
    return np.where(near, series, closed)


def _flip_time(x: np.ndarray) -> np.ndarray:
    y = np.array(x)
    y[..., -1] = -y[..., -1]
    return y


def batch_loss_and_grads(emb: np.ndarray, us, vs, negs):
    """Per-pair losses and tangent gradients for a batch.

    Returns ``(losses, grad_u, grad_v, grad_neg)`` where the gradient arrays
    are tangent at the respective points, shaped ``(B, D)``, ``(B, D)`` and
    ``(B, M, D)``.
    """
    us = np.asarray(us)
    vs = np.asarray(vs)
    negs = np.asarray(negs)
    xu = emb[us]  # (B, D)
    others = np.concatenate([emb[vs][:, None, :], emb[negs]], axis=1)  # (B, M+1, D)
    gamma = np.maximum(-manifold.minkowski_inner(xu[:, None, :], others), 1.0)
    dist = np.arccosh(gamma)
    sq = dist * dist
    logits = -sq
    top = logits.max(axis=1, keepdims=True)
    lse = top[:, 0] + np.log(np.exp(logits - top).sum(axis=1))
    losses = sq[:, 0] + lse
    prob = np.exp(logits - lse[:, None])

    dl_dsq = -prob
    dl_dsq[:, 0] += 1.0
    coef = dl_dsq * _dsq_dgamma(gamma)  # dL/dgamma_j, (B, M+1)

    # Euclidean partials of gamma_j = -<x_u, x_j>_M
    partial_u = np.einsum("bj,bjd->bd", coef, -_flip_time(others))
    partial_o = coef[:, :, None] * -_flip_time(xu)[:, None, :]

    grad_u = manifold.tangent_project(xu, manifold.ambient_gradient(partial_u))
    grad_o = manifold.tangent_project(others, manifold.ambient_gradient(partial_o))
    return losses, grad_u, grad_o[:, 0], grad_o[:, 1:]


def pair_loss(emb: np.ndarray, u: int, v: int, negatives: Sequence[int]) -> float:
    losses, *_ = batch_loss_and_grads(emb, [u], [v], [list(negatives)])
    return float(losses[0])


def pair_gradients(emb: np.ndarray, u: int, v: int, negatives: Sequence[int]) -> dict[int, np.ndarray]:
    """Riemannian gradient of :func:`pair_loss` for every node involved.

    Repeated nodes (a negative drawn twice, or ``u == v``) accumulate.
    """
    _, gu, gv, gn = batch_loss_and_grads(emb, [u], [v], [list(negatives)])
    out: dict[int, np.ndarray] = {}
    for node, g in [(u, gu[0]), (v, gv[0]), *zip(negatives, gn[0])]:
        node = int(node)
        out[node] = out[node] + g if node in out else g.copy()
    return out


BatchCallback = Callable[[int, int, float, np.ndarray], None]


def train(
    pm: PairMultiset,
    cfg: TrainConfig,
    rng: np.random.Generator | None = None,
    on_batch: BatchCallback | None = None,
) -> np.ndarray:
    """Mini-batch Riemannian SGD over the positive pairs, expanded by multiplicity.

    Each batch sums the tangent gradients per node at the node's current
    position, scales them by ``-learning_rate / batch_size`` and moves every
    touched node once with the exponential map. ``on_batch(epoch, batch,
    mean_loss, embedding)`` is called after every update.
    """
    if pm.total == 0:
        raise ValueError("no positive pairs to train on")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    emb = init_embeddings(pm.node_count, cfg, rng)
    sampler = NegativeSampler(pm)
    sampler.check(sampler.sources)
    pairs = pm.expanded()
    step = -cfg.learning_rate / cfg.batch_size
    grad = np.zeros_like(emb)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pairs))
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = pairs[order[start : start + cfg.batch_size]]
            us, vs = batch[:, 0], batch[:, 1]
            negs = sampler.sample(us, cfg.negatives, rng)
            losses, gu, gv, gn = batch_loss_and_grads(emb, us, vs, negs)
            mean_loss = float(losses.mean())
            if not np.isfinite(mean_loss):
                raise FloatingPointError(
                    f"non-finite loss in epoch {epoch}, batch {b}; "
                    f"learning rate {cfg.learning_rate} is probably too large"
                )
            grad[:] = 0.0
            np.add.at(grad, us, gu)
            np.add.at(grad, vs, gv)
            np.add.at(grad, negs.ravel(), gn.reshape(-1, emb.shape[1]))
            touched = np.unique(np.concatenate([us, vs, negs.ravel()]))
            emb[touched] = manifold.exp_map(emb[touched], step * grad[touched])
            if on_batch is not None:
                on_batch(epoch, b, mean_loss, emb)
    return emb


def write_embedding(emb: np.ndarray, labels: Sequence[str], stream) -> None:
    """``#dim n`` header, then the node token and its ambient coordinates, tab-separated."""
    stream.write(f"#dim {emb.shape[1] - 1}\n")
    for token, row in zip(labels, emb):
        stream.write(token + "\t" + "\t".join(repr(float(c)) for c in row) + "\n")


def read_embedding(stream) -> tuple[list[str], np.ndarray]:
    header = stream.readline().split()
    if len(header) != 2 or header[0] != "#dim":
        raise ValueError("embedding file must start with '#dim <n>'")
    dim = int(header[1])
    tokens, rows = [], []
    for lineno, line in enumerate(stream, 2):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != dim + 2:
            raise ValueError(f"line {lineno}: expected {dim + 1} coordinates")
        tokens.append(parts[0])
        rows.append([float(c) for c in parts[1:]])
    return tokens, np.array(rows, dtype=np.float64).reshape(-1, dim + 1)
