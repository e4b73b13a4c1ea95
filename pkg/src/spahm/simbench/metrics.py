from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x.reshape(-1, 1) if x.ndim <= 1 else x


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two finite point sets.

    Sets are (n, d) arrays; a 1-D array is read as n scalar points.
    """
    a = _as_points(a)
    b = _as_points(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs two non-empty sets")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    dist = cdist(a, b)
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def rel_error(est, truth) -> float:
    """``|est - truth| / |truth|``; Euclidean norms for vectors."""
    est = np.asarray(est, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    denom = float(np.linalg.norm(truth))
    if denom == 0.0:
        raise ZeroDivisionError("relative error is undefined for a zero true value")
    return float(np.linalg.norm(est - truth)) / denom


def co_cluster_fraction(est_assignments, true_assignments) -> float:
    """Fraction of local-atom pairs on which two matchings agree.

    A pair agrees when both matchings put the two atoms in the same global
    atom, or both keep them apart (the Rand index over all local atoms).
    Labels are arbitrary; only co-membership matters.
    """
    est = np.concatenate([np.asarray(a) for a in est_assignments])
    true = np.concatenate([np.asarray(a) for a in true_assignments])
    if est.shape != true.shape:
        raise ValueError("matchings cover different numbers of local atoms")
    n = est.size
    if n < 2:
        return 1.0
    same_est = est[:, None] == est[None, :]
    same_true = true[:, None] == true[None, :]
    iu = np.triu_indices(n, k=1)
    return float(np.mean(same_est[iu] == same_true[iu]))

