"""Closed-form barcodes: circles, products of circles, and tori.

Circle bars follow the known Rips persistence of the round circle, where the
nerve passes through odd spheres at the chord lengths of inscribed regular
polygons.  Products use the intersection rule that holds for the maximum
metric: a bar of the product in degree ``j`` is the intersection of one bar
from each factor, with factor degrees adding to ``j``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Sequence

import numpy as np

from .diagram import LEFT_OPEN, PersistenceDiagram

SQRT3 = math.sqrt(3.0)


def circle_barcode(radius: float, max_dimension: int) -> list[PersistenceDiagram]:
    """Rips diagrams of the circle of the given radius, dimensions ``0..max_dimension``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    out = [PersistenceDiagram(0, [(0.0, math.inf)], LEFT_OPEN)]
    for j in range(1, max_dimension + 1):
        if j % 2 == 0:
            out.append(PersistenceDiagram(j, [], LEFT_OPEN))
            continue
        ell = (j - 1) // 2
        birth = 2 * radius * math.sin(math.pi * ell / (2 * ell + 1))
        death = 2 * radius * math.sin(math.pi * (ell + 1) / (2 * ell + 3))
        out.append(PersistenceDiagram(j, [(birth, death)], LEFT_OPEN))
    return out


def _compositions(total: int, caps: Sequence[int]):
    if not caps:
        if total == 0:
            yield ()
        return
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first,) + rest


def kunneth_combine(factor_diagrams: Sequence[Sequence[PersistenceDiagram]], j: int) -> PersistenceDiagram:
    """Degree-``j`` diagram of a max-metric product from its factors' diagrams.

    ``factor_diagrams[n][i]`` is factor ``n``'s diagram in dimension ``i``.
    """
    if not factor_diagrams:
        raise ValueError("need at least one factor")
    conventions = {dg.convention for factor in factor_diagrams for dg in factor}
    if len(conventions) > 1:
        raise ValueError("factors mix interval conventions")
    convention = conventions.pop()
    caps = [len(factor) - 1 for factor in factor_diagrams]
    pairs = []
    for degrees in _compositions(j, caps):
        chosen = [factor_diagrams[n][deg].pairs for n, deg in enumerate(degrees)]
        if any(len(c) == 0 for c in chosen):
            continue
        for combo in itertools.product(*chosen):
            arr = np.asarray(combo)
            birth, death = arr[:, 0].max(), arr[:, 1].min()
            if birth < death:
                pairs.append((birth, death))
    return PersistenceDiagram(j, pairs, convention)


def _check_magnitudes(magnitudes) -> np.ndarray:
    mags = np.asarray(magnitudes, dtype=float)
    if mags.ndim != 1 or mags.size == 0:
        raise ValueError("need a nonempty vector of magnitudes")
    if np.any(mags <= 0):
        raise ValueError("magnitudes must be positive")
    if np.any(np.diff(mags) > 0):
        raise ValueError("magnitudes must be sorted in descending order")
    return mags


def _run(mags: np.ndarray, n: int) -> np.ndarray:
    """1-based indices sharing the magnitude of index ``n``."""
    return np.flatnonzero(np.isclose(mags, mags[n - 1], rtol=1e-12, atol=0.0)) + 1


def multiplicity_mu(magnitudes, j: int, n: int) -> int:
    """Binomial multiplicity of the bar ``(0, sqrt(3) |c_n|)`` in degree ``j``.

    Sums ``C(m - 1, j - 1)`` over the indices ``m`` tied with ``n``.
    """
    mags = _check_magnitudes(magnitudes)
    if not 1 <= n <= len(mags):
        raise ValueError(f"n must lie in 1..{len(mags)}")
    if j < 1:
        raise ValueError("j must be >= 1")
    return sum(math.comb(int(m) - 1, j - 1) for m in _run(mags, n))


def torus_diagram(coefficient_magnitudes, j: int) -> PersistenceDiagram:
    """Low-birth part of the degree-``j`` diagram of the flat torus of circles.

    Built from circle barcodes with radii ``|c_n|`` through the product rule;
    only bars born below ``sqrt(3) * min |c_n|`` are kept, which is where all
    bars are born at zero.
    """
    mags = _check_magnitudes(coefficient_magnitudes)
    if not 1 <= j <= len(mags):
        raise ValueError(f"j must lie in 1..{len(mags)}")
    factors = [circle_barcode(float(r), j) for r in mags]
    full = kunneth_combine(factors, j)
    cutoff = SQRT3 * float(mags.min())
    keep = full.pairs[:, 0] < cutoff
    return PersistenceDiagram(j, full.pairs[keep], LEFT_OPEN)


def torus_multiplicities(coefficient_magnitudes, j: int) -> Counter:
    """``{death: multiplicity}`` from the binomial formula, one entry per tie run."""
    mags = _check_magnitudes(coefficient_magnitudes)
    out: Counter = Counter()
    seen = set()
    for n in range(1, len(mags) + 1):
        run = tuple(_run(mags, n))
        if run in seen:
            continue
        seen.add(run)
        mu = multiplicity_mu(mags, j, n)
        if mu:
            out[2 * float(mags[n - 1]) * math.sin(math.pi / 3)] += mu
    return out
