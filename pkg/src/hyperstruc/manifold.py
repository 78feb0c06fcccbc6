"""Geometry of the hyperboloid model.

Points live in Minkowski space R^{n:1} with the time-like coordinate stored
last, on the upper sheet ``<x, x>_M = -1, x[-1] >= 1``. All functions accept
single vectors or stacks of vectors along the leading axes.
"""

from __future__ import annotations

import numpy as np

SMALL_NORM = 1e-12
# below this -<u, v>_M the chord formula is used for distances
NEAR_GAMMA = 1.5


def minkowski_inner(u, v) -> np.ndarray | float:
    """``sum(u[:-1] * v[:-1]) - u[-1] * v[-1]`` along the last axis."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return np.sum(u[..., :-1] * v[..., :-1], axis=-1) - u[..., -1] * v[..., -1]


def ambient_gradient(partials) -> np.ndarray:
    """Turn Euclidean partials into the Minkowski gradient (flip the time-like sign)."""
    g = np.array(partials, dtype=np.float64)
    g[..., -1] = -g[..., -1]
    return g


def tangent_project(p, g) -> np.ndarray:
    """Project an ambient vector onto the tangent space at ``p``."""
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    return g + minkowski_inner(p, g)[..., None] * p


def tangent_norm(v) -> np.ndarray | float:
    sq = minkowski_inner(v, v)
    if np.any(sq < -1e-9 * np.maximum(1.0, np.sum(np.square(v), axis=-1))):
        raise ValueError("vector is time-like; not a tangent vector of the hyperboloid")
    return np.sqrt(np.maximum(sq, 0.0))


def repair(x) -> np.ndarray:
    """Recompute the time-like coordinate so ``x`` lies exactly on the upper sheet."""
    x = np.array(x, dtype=np.float64)
    x[..., -1] = np.sqrt(1.0 + np.sum(np.square(x[..., :-1]), axis=-1))
    return x


def exp_map(p, v) -> np.ndarray:
    """Follow the geodesic from ``p`` with initial velocity ``v`` for unit time."""
    p = np.asarray(p, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    norm = np.asarray(tangent_norm(v))
    small = norm < SMALL_NORM
    safe = np.where(small, 1.0, norm)
    out = np.cosh(norm)[..., None] * p + (np.sinh(norm) / safe)[..., None] * v
    out = np.where(small[..., None], p, out)
    return repair(out)


def hyperbolic_distance(u, v) -> np.ndarray | float:
    """``arccosh(-<u, v>_M)``, with the argument clamped at 1.

    Close pairs use the equivalent ``2 asinh(|u - v|_M / 2)``, which does not
    lose half of the significant digits near zero distance.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    gamma = np.maximum(-minkowski_inner(u, v), 1.0)
    diff = u - v
    chord = np.sqrt(np.maximum(minkowski_inner(diff, diff), 0.0))
    return np.where(gamma < NEAR_GAMMA, 2.0 * np.arcsinh(0.5 * chord), np.arccosh(gamma))


def pairwise_distances(x) -> np.ndarray:
    """Distance matrix between the rows of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    gram = x[:, :-1] @ x[:, :-1].T - np.outer(x[:, -1], x[:, -1])
    d = np.arccosh(np.maximum(-gram, 1.0))
    iu, iv = np.nonzero(-gram < NEAR_GAMMA)
    d[iu, iv] = hyperbolic_distance(x[iu], x[iv])
    upper = np.triu(d, 1)
    return upper + upper.T


def to_poincare(x) -> np.ndarray:
    """Map hyperboloid points into the open unit ball."""
    x = np.asarray(x, dtype=np.float64)
    return x[..., :-1] / (1.0 + x[..., -1:])


def origin(dim: int) -> np.ndarray:
    o = np.zeros(dim + 1)
    o[-1] = 1.0
    return o
