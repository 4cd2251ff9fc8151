"""KNN weight graphs: intra-class adjacency, degree vectors and inter-class indicators.

All neighbor searches use Euclidean distance, exclude the sample itself, and
break distance ties by the lower sample index, so results are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class WeightGraphs:
    """Graphs for one class in one view.

    ``adjacency`` is over the class's own samples, ``degree`` its row sums,
    ``indicator`` flags the opposing class's samples that are near neighbors
    of this class.
    """

    adjacency: np.ndarray
    degree: np.ndarray
    indicator: np.ndarray


def _k_nearest(dist: np.ndarray, k: int) -> np.ndarray:
    # stable sort keeps lower column index first among equal distances
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def intra_class_weights(x, k: int) -> np.ndarray:
    """Symmetric 0/1 KNN adjacency of one class, zero diagonal.

    ``W[i, j] = 1`` iff i is among the k nearest of j or j among the k nearest
    of i. ``k`` is clamped to ``n - 1``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise GraphError(f"intra-class graph needs at least 2 samples, got {n}")
    if k < 1:
        raise GraphError("k must be >= 1")
    k = min(k, n - 1)
    dist = cdist(x, x, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    nn = _k_nearest(dist, k)
    w = np.zeros((n, n), dtype=np.int8)
    w[np.repeat(np.arange(n), k), nn.ravel()] = 1
    w |= w.T
    np.fill_diagonal(w, 0)
    return w


def degree_vector(w) -> np.ndarray:
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {w.shape}")
    return w.sum(axis=1).astype(float)


def inter_class_indicator(x_own, x_other, k: int) -> np.ndarray:
    """0/1 flags over ``x_other``: 1 where the sample is among the k nearest
    opposing samples of at least one own-class sample."""
    x_own = np.atleast_2d(np.asarray(x_own, dtype=float))
    x_other = np.atleast_2d(np.asarray(x_other, dtype=float))
    if x_own.shape[0] == 0 or x_other.shape[0] == 0:
        raise GraphError("inter-class indicator needs both classes nonempty")
    if k < 1:
        raise GraphError("k must be >= 1")
    k = min(k, x_other.shape[0])
    nn = _k_nearest(cdist(x_own, x_other, "sqeuclidean"), k)
    f = np.zeros(x_other.shape[0], dtype=np.int8)
    f[np.unique(nn)] = 1
    return f


def class_graphs(x_own, x_other, k: int) -> WeightGraphs:
    """Graphs for one class; a singleton class gets an empty graph with degree 1."""
    x_own = np.atleast_2d(np.asarray(x_own, dtype=float))
    if x_own.shape[0] == 1:
        adj = np.zeros((1, 1), dtype=np.int8)
        deg = np.ones(1)
    else:
        adj = intra_class_weights(x_own, k)
        deg = degree_vector(adj)
    return WeightGraphs(adj, deg, inter_class_indicator(x_own, x_other, k))


def build_graphs(ds, k: int) -> dict:
    """Graphs per ``(view, class)`` computed independently on each view's features.

    ``result["A", 1]`` is the positive class in view A (indicator over the
    negatives); ``result["B", -1]`` the negative class in view B, and so on.
    """
    pos, neg = ds.positive, ds.negative
    out = {}
    for view, x in (("A", ds.view_a), ("B", ds.view_b)):
        out[view, 1] = class_graphs(x[pos], x[neg], k)
        out[view, -1] = class_graphs(x[neg], x[pos], k)
    return out
