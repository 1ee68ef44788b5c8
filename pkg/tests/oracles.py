"""Slow, independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np


def naive_rips_pairs(dist, max_dim):
    """Standard (homology) column reduction of the full Rips boundary matrix.

    Every simplex up to dimension ``max_dim + 1`` is listed explicitly, sorted
    by (diameter, dimension, vertex tuple), and columns are reduced left to
    right with Python sets as Z/2 chains.  Returns ``{dim: sorted pairs}``
    without zero-length bars.
    """
    dist = np.asarray(dist, dtype=float)
    n = len(dist)
    simplices = []
    for k in range(1, max_dim + 3):
        for s in itertools.combinations(range(n), k):
            diam = max((dist[a, b] for a, b in itertools.combinations(s, 2)), default=0.0)
            simplices.append((diam, k - 1, s))
    simplices.sort()
    position = {s: i for i, (_, _, s) in enumerate(simplices)}
    low_owner = {}
    columns = []
    paired = set()
    out = {j: [] for j in range(max_dim + 1)}
    for j, (diam, dim, s) in enumerate(simplices):
        col = set()
        if dim > 0:
            col = {position[f] for f in itertools.combinations(s, dim)}
        while col:
            low = max(col)
            if low not in low_owner:
                break
            col ^= columns[low_owner[low]]
        columns.append(col)
        if col:
            low = max(col)
            low_owner[low] = j
            paired.add(low)
            paired.add(j)
            bdiam, bdim, _ = simplices[low]
            if bdim <= max_dim and diam > bdiam:
                out[bdim].append((bdiam, diam))
    for j, (diam, dim, s) in enumerate(simplices):
        if j not in paired and not columns[j] and dim <= max_dim:
            out[dim].append((diam, math.inf))
    return {k: sorted(v) for k, v in out.items()}


def brute_bottleneck(p, q):
    """Bottleneck distance by enumerating every partial matching."""
    p = [tuple(x) for x in p]
    q = [tuple(x) for x in q]

    def cost(a, b):
        if math.isinf(a[1]) or math.isinf(b[1]):
            if math.isinf(a[1]) and math.isinf(b[1]):
                return abs(a[0] - b[0])
            return math.inf
        return max(abs(a[0] - b[0]), abs(a[1] - b[1]))

    def diag(a):
        return (a[1] - a[0]) / 2.0

    best = math.inf
    for k in range(min(len(p), len(q)) + 1):
        for sub in itertools.combinations(range(len(p)), k):
            for perm in itertools.permutations(range(len(q)), k):
                worst = 0.0
                for i, j in zip(sub, perm):
                    worst = max(worst, cost(p[i], q[j]))
                used_p, used_q = set(sub), set(perm)
                for i in range(len(p)):
                    if i not in used_p:
                        worst = max(worst, diag(p[i]))
                for j in range(len(q)):
                    if j not in used_q:
                        worst = max(worst, diag(q[j]))
                best = min(best, worst)
    return best


def random_metric(rng, n, max_weight=4, edge_prob=0.5):
    """Integer shortest-path metric of a random connected weighted graph."""
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0)
    order = rng.permutation(n)
    for a in range(1, n):
        b = order[rng.integers(0, a)]
        c = rng.integers(1, max_weight + 1)
        w[order[a], b] = w[b, order[a]] = c
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                c = rng.integers(1, max_weight + 1)
                w[a, b] = w[b, a] = min(w[a, b], c)
    for k in range(n):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return w


def gram_singular_values(a):
    """Singular values as square roots of Gram eigenvalues found by bisection.

    Eigenvalues of the Hermitian Gram matrix ``G = A^H A`` are located with
    Sylvester inertia counts: the number of negative pivots of the symmetric
    indefinite factorisation of ``G - x I`` equals the number of eigenvalues
    below ``x``.  Each eigenvalue is then bisected to machine precision.
    """
    from scipy.linalg import ldl

    a = np.asarray(a, dtype=complex)
    g = a.conj().T @ a
    m = g.shape[0]
    eye = np.eye(m)

    def below(x):
        with warnings.catch_warnings():
            # the Hermitian diagonal is real up to rounding
            warnings.simplefilter("ignore", np.exceptions.ComplexWarning)
            _, dmat, _ = ldl(g - x * eye, hermitian=True)
        return int(np.sum(np.linalg.eigvalsh(dmat) < 0))

    upper = float(np.max(np.sum(np.abs(g), axis=1))) * 1.01 + 1e-300
    vals = []
    for r in range(m):
        lo, hi = 0.0, upper
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if below(mid) > r:
                hi = mid
            else:
                lo = mid
        vals.append(0.5 * (lo + hi))
    return np.sqrt(np.maximum(vals, 0.0))


def torus_covering_radius(points, probes_per_axis=200):
    """Largest distance from a probe grid on the flat 2-torus to the nearest point.

    Distances wrap in each coordinate.  The probe grid is cell-centred, so the
    result underestimates the true covering radius by at most half a probe
    diagonal, which is added back to keep the oracle an upper bound.
    """
    from scipy.spatial import cKDTree

    period = 2 * math.pi
    pts = np.asarray(points, dtype=float) % period
    axis = (np.arange(probes_per_axis) + 0.5) * (period / probes_per_axis)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    probes = np.column_stack([gx.ravel(), gy.ravel()])
    # a periodic tree implements the wrapped distance
    nearest, _ = cKDTree(pts, boxsize=period).query(probes)
    worst = float(nearest.max())
    return worst + math.sqrt(2) * math.pi / probes_per_axis


def symbolic_smoothness_bound(N, r, K, norms):
    """The smoothness tail bound evaluated exactly with sympy, then floated."""
    import sympy as sp

    area = 2 * sp.pi ** sp.Rational(N, 2) / sp.gamma(sp.Rational(N, 2))
    total = sum(sp.nsimplify(v) ** 2 for v in norms)
    expr = sp.sqrt(area * sp.Integer(N) ** r / (sp.Integer(K) ** (2 * r - N) * (2 * r - N)) * total)
    return float(expr.evalf(30))


def torus_bars_by_subsets(magnitudes, j):
    """Degree-j bars of a product of circles below sqrt(3) * min radius.

    In that regime each circle contributes either its H0 bar (0, inf) or its
    H1 bar (0, sqrt(3) r); a degree-j class chooses j circles for H1, and its
    death is the smallest chosen radius times sqrt(3).
    """
    out = []
    for chosen in itertools.combinations(range(len(magnitudes)), j):
        out.append((0.0, math.sqrt(3) * min(magnitudes[c] for c in chosen)))
    return sorted(out)
