"""Vietoris-Rips persistent homology (Z/2 coefficients).

The reduction runs on the coboundary matrix with clearing, implicit
coboundaries and apparent-pair shortcuts; see :mod:`qpsw.persistence._kernel`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .diagram import HALF_OPEN, PersistenceDiagram

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FiltrationInput:
    distances: np.ndarray
    max_dimension: int = 1
    threshold: float = math.inf


def enclosing_radius(distances: np.ndarray) -> float:
    """min over points of the max distance to the others.

    At this scale the Rips complex is a cone, so truncating there loses no
    finite bar.
    """
    if len(distances) <= 1:
        return 0.0
    return float(np.min(np.max(distances, axis=1)))


def check_distance_matrix(distances) -> np.ndarray:
    dist = np.ascontiguousarray(distances, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError("not a distance matrix: must be square")
    if not np.all(np.isfinite(dist)):
        raise ValueError("not a distance matrix: non-finite entries")
    if np.any(dist < 0) or np.any(np.diag(dist) != 0) or not np.array_equal(dist, dist.T):
        raise ValueError("not a distance matrix")
    return dist


def rips_persistence(distances, max_dimension: int = 1, threshold: float = math.inf) -> list[PersistenceDiagram]:
    """Rips persistence diagrams in dimensions ``0..max_dimension``.

    Parameters
    ----------
    distances : (n, n) array
        Symmetric, zero diagonal, non-negative.
    max_dimension : int
        Highest homological dimension to compute.
    threshold : float
        Largest simplex diameter admitted.  Values above the enclosing radius
        are clipped to it.  Bars alive at a finite cut are reported with
        infinite death.

    Returns
    -------
    list of PersistenceDiagram
        Half-open ``[birth, death)`` bars, zero-length bars dropped.
    """
    if isinstance(distances, FiltrationInput):
        max_dimension, threshold = distances.max_dimension, distances.threshold
        distances = distances.distances
    dist = check_distance_matrix(distances)
    if max_dimension < 0:
        raise ValueError("max_dimension must be >= 0")
    n = dist.shape[0]
    if n == 0:
        return [PersistenceDiagram(j) for j in range(max_dimension + 1)]

    thresh = float(min(threshold, enclosing_radius(dist)))
    binom = _kernel.binomial_table(n, max_dimension + 2)
    edge_d, edge_i = _kernel.edges_below(dist, thresh, binom)
    deaths0, roots, col_d, col_i = _kernel.dim0_pairs(n, dist, edge_d, edge_i, binom, thresh, max_dimension > 0)

    pairs0 = [(0.0, d) for d in deaths0] + [(0.0, math.inf)] * int(roots)
    out = [PersistenceDiagram(0, pairs0, HALF_OPEN)]

    prev_d, prev_i = edge_d, edge_i
    for dim in range(1, max_dimension + 1):
        log.debug("dim %d: %d columns", dim, len(col_d))
        births, deaths, ess, pivots = _kernel.reduce_dimension(dim, n, dist, binom, thresh, col_d, col_i)
        pairs = np.column_stack([births, deaths])
        if len(ess):
            pairs = np.vstack([pairs, np.column_stack([ess, np.full(len(ess), math.inf)])])
        out.append(PersistenceDiagram(dim, pairs, HALF_OPEN))
        if dim < max_dimension:
            keep_next = dim + 1 < max_dimension
            prev_d, prev_i, col_d, col_i = _kernel.assemble_columns(
                dim + 1, n, dist, binom, thresh, prev_d, prev_i, pivots, keep_next
            )
    return out
