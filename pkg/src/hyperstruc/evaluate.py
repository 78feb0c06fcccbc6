"""Hyperbolic k-NN classification with stratified cross-validation, plus
distance-based checks of how well an embedding groups structural roles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .manifold import hyperbolic_distance, pairwise_distances

# Micro-F1 reported for the hyperboloid model and the two Euclidean baselines.
REFERENCE_MICRO_F1 = {
    "brazil": {"hyperboloid": 0.780, "struc2vec": 0.732, "node2vec": 0.267},
    "usa": {"hyperboloid": 0.670, "struc2vec": 0.651, "node2vec": 0.473},
    "europe": {"hyperboloid": 0.581, "struc2vec": 0.577, "node2vec": 0.329},
}


def _vote(labels: np.ndarray, dists: np.ndarray) -> int:
    classes, counts = np.unique(labels, return_counts=True)
    tied = classes[counts == counts.max()]
    if tied.size == 1:
        return int(tied[0])
    sums = np.array([dists[labels == c].sum() for c in tied])
    return int(tied[np.flatnonzero(sums == sums.min())[0]])


def knn_predict(emb: np.ndarray, train_ids, train_labels, query_id: int, k: int = 5) -> int:
    """Majority label of the ``k`` hyperbolically nearest training nodes.

    Vote ties go to the label with the smaller summed distance, then the
    smaller label. Equidistant neighbours are ranked by node id.
    """
    train_ids = np.asarray(train_ids)
    train_labels = np.asarray(train_labels)
    if k < 1 or train_ids.size == 0:
        raise ValueError("need k >= 1 and a non-empty training set")
    d = hyperbolic_distance(emb[query_id][None, :], emb[train_ids])
    return _knn_from_distances(d, train_ids, train_labels, k)


def _knn_from_distances(d, train_ids, train_labels, k) -> int:
    order = np.lexsort((train_ids, d))[:k]
    return _vote(train_labels[order], d[order])


def micro_f1(predictions, truths) -> float:
    """Micro-averaged F1; for single-label multiclass output this is accuracy."""
    p = np.asarray(predictions)
    t = np.asarray(truths)
    if p.shape != t.shape:
        raise ValueError("predictions and truths differ in length")
    if p.size == 0:
        raise ValueError("need at least one prediction")
    tp = int((p == t).sum())
    fp = fn = p.size - tp
    return 2 * tp / (2 * tp + fp + fn)


@dataclass
class EvalReport:
    micro_f1: float
    fold_scores: list[float]
    confusion: np.ndarray  # rows: true class, columns: predicted
    predictions: dict[int, int] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"micro_f1\t{self.micro_f1!r}"]
        out += [f"fold_{i}\t{s!r}" for i, s in enumerate(self.fold_scores)]
        for t, row in enumerate(self.confusion):
            out.append(f"confusion_{t}\t" + " ".join(str(int(c)) for c in row))
        return out


def stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per item; every class is shuffled then dealt round-robin."""
    assignment = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < folds:
            raise ValueError(f"class {int(c)} has {members.size} member(s), fewer than {folds} folds")
        members = rng.permutation(members)
        assignment[members] = (offset + np.arange(members.size)) % folds
        offset += members.size
    return assignment


def cross_validate(
    emb: np.ndarray,
    labels: Mapping[int, int],
    folds: int = 10,
    k: int = 5,
    rng: np.random.Generator | None = None,
) -> EvalReport:
    """Stratified ``folds``-fold cross-validation of the hyperbolic k-NN classifier."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if rng is None:
        rng = np.random.default_rng(0)
    ids = np.array(sorted(labels), dtype=np.int64)
    y = np.array([labels[i] for i in ids], dtype=np.int64)
    assignment = stratified_folds(y, folds, rng)
    dist = pairwise_distances(emb[ids])
    n_classes = int(y.max()) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    preds = np.empty_like(y)
    scores = []
    for f in range(folds):
        test = np.flatnonzero(assignment == f)
        train = np.flatnonzero(assignment != f)
        for q in test:
            preds[q] = _knn_from_distances(dist[q, train], ids[train], y[train], k)
            confusion[y[q], preds[q]] += 1
        scores.append(micro_f1(preds[test], y[test]))
    return EvalReport(micro_f1(preds, y), scores, confusion, dict(zip(ids.tolist(), preds.tolist())))


@dataclass
class MirrorMetric:
    mean_pair_distance: float
    mean_all_distance: float
    top10_fraction: float


def mirror_metric(emb: np.ndarray, pairs: Sequence[tuple[int, int]], top: int = 10) -> MirrorMetric:
    """Compare mirrored-pair distances with the all-pairs mean.

    ``top10_fraction`` counts nodes (both members of every pair) whose mirror
    is among their ``top`` nearest other nodes; distance ties rank by node id.
    """
    d = pairwise_distances(emb)
    n = d.shape[0]
    pair_d = np.array([d[a, b] for a, b in pairs])
    iu = np.triu_indices(n, 1)
    hits = 0
    for a, b in pairs:
        for x, y in ((a, b), (b, a)):
            row = d[x].copy()
            row[x] = np.inf
            nearest = np.lexsort((np.arange(n), row))[:top]
            hits += int(y in nearest)
    return MirrorMetric(float(pair_d.mean()), float(d[iu].mean()), hits / (2 * len(pairs)))


def role_separation(emb: np.ndarray, roles: Mapping[int, int]) -> float:
    """Mean intra-role distance divided by mean inter-role distance."""
    ids = np.array(sorted(roles))
    y = np.array([roles[i] for i in ids])
    if np.unique(y).size < 2:
        raise ValueError("need at least two roles")
    d = pairwise_distances(emb[ids])
    iu = np.triu_indices(ids.size, 1)
    same = (y[:, None] == y[None, :])[iu]
    vals = d[iu]
    intra = vals[same].mean() if same.any() else 0.0
    return float(intra / vals[~same].mean())
