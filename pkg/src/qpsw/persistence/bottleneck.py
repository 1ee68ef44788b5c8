"""Exact bottleneck distance between two persistence diagrams.

The optimum is one of finitely many values: a pairwise L-infinity cost or a
half-persistence (distance to the diagonal).  We sort those candidates and
binary-search for the smallest one that admits a perfect matching in the
usual augmented bipartite graph, where every point also gets a private copy
on the diagonal of the other side.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .diagram import PersistenceDiagram


def _split(diagram) -> tuple[np.ndarray, np.ndarray]:
    pairs = diagram.pairs if isinstance(diagram, PersistenceDiagram) else np.asarray(diagram, dtype=float).reshape(-1, 2)
    inf = np.isinf(pairs[:, 1])
    return pairs[~inf], np.sort(pairs[inf, 0])


def _augmented_costs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    n, m = len(p), len(q)
    cost = np.full((n + m, m + n), np.inf)
    if n and m:
        cost[:n, :m] = np.maximum(
            np.abs(p[:, None, 0] - q[None, :, 0]), np.abs(p[:, None, 1] - q[None, :, 1])
        )
    cost[np.arange(n), m + np.arange(n)] = (p[:, 1] - p[:, 0]) / 2
    cost[n + np.arange(m), np.arange(m)] = (q[:, 1] - q[:, 0]) / 2
    cost[n:, m:] = 0.0
    return cost


def _perfect(cost: np.ndarray, delta: float) -> bool:
    graph = csr_matrix((cost <= delta).astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(d1, d2) -> float:
    """Bottleneck distance; infinite bars only match infinite bars."""
    if isinstance(d1, PersistenceDiagram) and isinstance(d2, PersistenceDiagram) and d1.dimension != d2.dimension:
        raise ValueError("diagrams have different dimensions")
    p, p_inf = _split(d1)
    q, q_inf = _split(d2)
    if len(p_inf) != len(q_inf):
        return math.inf
    # on a line the sorted matching minimises the largest displacement
    inf_part = float(np.max(np.abs(p_inf - q_inf))) if len(p_inf) else 0.0

    if len(p) + len(q) == 0:
        return inf_part
    cost = _augmented_costs(p, q)
    cand = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect(cost, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(inf_part, float(cand[lo]))
