"""Lloyd's k-means with greedy k-means++ seeding, and the two baselines."""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np


class KMeansResult(NamedTuple):
    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    history: list[float]  # SSE after each assignment step


def _sq_dists(x, x_sq, centers):
    d = x_sq[:, None] - 2.0 * x @ centers.T + np.sum(centers**2, axis=1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: each step samples several candidates and keeps the best."""
    n = x.shape[0]
    x_sq = np.sum(x**2, axis=1)
    trials = 2 + int(math.log(k))
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    closest = _sq_dists(x, x_sq, centers[:1])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            # fewer distinct points than clusters requested so far; take unused ones in order
            centers[c] = x[c % n]
            continue
        cand = np.searchsorted(np.cumsum(closest), rng.random(trials) * total)
        cand = np.minimum(cand, n - 1)
        dist = np.minimum(closest[None, :], _sq_dists(x, x_sq, x[cand]).T)
        best = int(np.argmin(dist.sum(axis=1)))
        centers[c] = x[cand[best]]
        closest = dist[best]
    return centers


def _lloyd(x, centers, max_iter):
    x_sq = np.sum(x**2, axis=1)
    labels = None
    history = []
    for _ in range(max_iter):
        dist = _sq_dists(x, x_sq, centers)
        new_labels = np.argmin(dist, axis=1)
        point_d = dist[np.arange(x.shape[0]), new_labels]
        history.append(float(point_d.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=centers.shape[0])
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        nonempty = counts > 0
        centers = centers.copy()
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            far = int(np.argmax(point_d))
            centers[c] = x[far]
            point_d[far] = 0.0
    return centers, labels, history


def kmeans(data, k: int, seed=0, n_init: int = 1, max_iter: int = 300) -> KMeansResult:
    """Cluster ``data`` (n, d) into ``k`` groups; deterministic for a fixed seed.

    With ``n_init > 1`` the run with the lowest final SSE is kept.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if k < 1:
        raise ValueError("k must be positive")
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points ({x.shape[0]})")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = root.spawn(n_init)
    best = None
    for ss in seeds:
        rng = np.random.default_rng(ss)
        centers, labels, history = _lloyd(x, kmeans_plusplus(x, k, rng), max_iter)
        result = KMeansResult(centers, labels, history[-1], history)
        if best is None or result.sse < best.sse:
            best = result
    return best


def baseline_pooled(raw_data: Sequence[np.ndarray], k: int, seed=0, n_init: int = 1) -> np.ndarray:
    """k-means on all groups' raw data pooled together."""
    return kmeans(np.vstack(list(raw_data)), k, seed, n_init).centroids


def baseline_match_kmeans(local_atom_sets: Sequence[np.ndarray], k: int, seed=0, n_init: int = 1) -> np.ndarray:
    """k-means over the concatenated local centroid estimates."""
    return kmeans(np.vstack(list(local_atom_sets)), k, seed, n_init).centroids
