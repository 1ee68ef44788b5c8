"""Numba kernels for Vietoris-Rips persistent cohomology over Z/2.

Simplices are encoded by the combinatorial number system: a ``k``-simplex with
vertices ``v_k > ... > v_0`` has index ``sum_i C(v_i, i + 1)``.  The simplex
order used throughout is (diameter ascending, index descending); columns are
reduced in the reverse of that order and the pivot of a coboundary column is
its earliest entry.  Coboundaries are never stored: each working column is
regenerated from the reduction matrix, which only records which simplices were
summed into it.
"""

import numpy as np
from numba import njit, types
from numba.typed import Dict

_INT = types.int64


@njit(cache=True)
def binomial_table(n, k_max):
    table = np.zeros((k_max + 1, n + 2), dtype=np.int64)
    for i in range(n + 2):
        table[0, i] = 1
    for k in range(1, k_max + 1):
        for i in range(1, n + 2):
            table[k, i] = table[k, i - 1] + table[k - 1, i - 1]
    return table


@njit(cache=True)
def _max_vertex(idx, k, top, binom):
    # largest v <= top with C(v, k) <= idx
    lo = k - 1
    hi = top
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if binom[k, mid] <= idx:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit(cache=True)
def _vertices(idx, dim, n, binom, out):
    top = n - 1
    for k in range(dim + 1, 0, -1):
        v = _max_vertex(idx, k, top, binom)
        out[dim + 1 - k] = v
        idx -= binom[k, v]
        top = v - 1


@njit(cache=True)
def _diameter(idx, dim, n, dist, binom, buf):
    _vertices(idx, dim, n, binom, buf)
    diam = 0.0
    for a in range(dim + 1):
        for b in range(a + 1, dim + 1):
            if dist[buf[a], buf[b]] > diam:
                diam = dist[buf[a], buf[b]]
    return diam


# ---------------------------------------------------------------- heap
# Binary min-heap on (diameter, -index) held in growable parallel arrays.


@njit(cache=True)
def _before(d1, i1, d2, i2):
    # True when (d1, i1) precedes (d2, i2) in filtration order
    if d1 < d2:
        return True
    if d1 > d2:
        return False
    return i1 > i2


@njit(cache=True)
def _heap_push(hd, hi, size, d, i):
    if size == hd.shape[0]:
        nd = np.empty(2 * size, dtype=np.float64)
        ni = np.empty(2 * size, dtype=np.int64)
        nd[:size] = hd
        ni[:size] = hi
        hd = nd
        hi = ni
    pos = size
    hd[pos] = d
    hi[pos] = i
    while pos > 0:
        parent = (pos - 1) >> 1
        if _before(hd[pos], hi[pos], hd[parent], hi[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            pos = parent
        else:
            break
    return hd, hi, size + 1


@njit(cache=True)
def _heap_pop(hd, hi, size):
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _before(hd[right], hi[right], hd[left], hi[left]):
            best = right
        if _before(hd[best], hi[best], hd[pos], hi[pos]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            pos = best
        else:
            break
    return size


@njit(cache=True)
def _pop_pivot(hd, hi, size):
    """Pop entries until one survives Z/2 cancellation; return (d, i, size)."""
    while size > 0:
        d = hd[0]
        i = hi[0]
        size = _heap_pop(hd, hi, size)
        if size == 0 or hi[0] != i:
            return d, i, size
        size = _heap_pop(hd, hi, size)
    return -1.0, np.int64(-1), size


# ------------------------------------------------------ (co)boundaries


@njit(cache=True)
def _push_coboundary(idx, diam, dim, n, dist, binom, thresh, verts, hd, hi, size):
    _vertices(idx, dim, n, binom, verts)
    idx_below = idx
    idx_above = np.int64(0)
    v = n - 1
    k = dim + 1
    while v >= k:
        while binom[k, v] <= idx_below:
            idx_below -= binom[k, v]
            idx_above += binom[k + 1, v]
            v -= 1
            k -= 1
        if v < k:
            break
        cd = diam
        for a in range(dim + 1):
            w = dist[v, verts[a]]
            if w > cd:
                cd = w
        cidx = idx_above + binom[k + 1, v] + idx_below
        v -= 1
        if cd <= thresh:
            hd, hi, size = _heap_push(hd, hi, size, cd, cidx)
    return hd, hi, size


@njit(cache=True)
def _zero_pivot_cofacet(idx, diam, dim, n, dist, binom, thresh, verts):
    _vertices(idx, dim, n, binom, verts)
    idx_below = idx
    idx_above = np.int64(0)
    v = n - 1
    k = dim + 1
    while v >= k:
        while binom[k, v] <= idx_below:
            idx_below -= binom[k, v]
            idx_above += binom[k + 1, v]
            v -= 1
            k -= 1
        if v < k:
            break
        cd = diam
        for a in range(dim + 1):
            w = dist[v, verts[a]]
            if w > cd:
                cd = w
        cidx = idx_above + binom[k + 1, v] + idx_below
        v -= 1
        if cd == diam and cd <= thresh:
            return cidx
    return np.int64(-1)


@njit(cache=True)
def _zero_pivot_facet(idx, diam, dim, n, dist, binom, verts):
    # facets come out in increasing index order, i.e. latest-first
    _vertices(idx, dim, n, binom, verts)
    idx_below = idx
    idx_above = np.int64(0)
    for pos in range(dim + 1):
        k = dim + 1 - pos
        v = verts[pos]
        idx_below -= binom[k, v]
        fidx = idx_above + idx_below
        idx_above += binom[k - 1, v]
        fd = 0.0
        for a in range(dim + 1):
            if a == pos:
                continue
            for b in range(a + 1, dim + 1):
                if b == pos:
                    continue
                w = dist[verts[a], verts[b]]
                if w > fd:
                    fd = w
        if fd == diam:
            return fidx
    return np.int64(-1)


@njit(cache=True)
def _apparent_cofacet(idx, diam, dim, n, dist, binom, thresh, verts, buf):
    c = _zero_pivot_cofacet(idx, diam, dim, n, dist, binom, thresh, verts)
    if c == -1:
        return np.int64(-1)
    if _zero_pivot_facet(c, diam, dim + 1, n, dist, binom, verts) == idx:
        return c
    return np.int64(-1)


@njit(cache=True)
def _apparent_facet(idx, diam, dim, n, dist, binom, thresh, verts, buf):
    f = _zero_pivot_facet(idx, diam, dim, n, dist, binom, verts)
    if f == -1:
        return np.int64(-1)
    if _zero_pivot_cofacet(f, diam, dim - 1, n, dist, binom, thresh, verts) == idx:
        return f
    return np.int64(-1)


# ------------------------------------------------------------- dim 0


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def edges_below(dist, thresh, binom):
    n = dist.shape[0]
    count = 0
    for i in range(n):
        for j in range(i):
            if dist[i, j] <= thresh:
                count += 1
    ed = np.empty(count, dtype=np.float64)
    ei = np.empty(count, dtype=np.int64)
    c = 0
    for i in range(n):
        for j in range(i):
            if dist[i, j] <= thresh:
                ed[c] = dist[i, j]
                ei[c] = binom[2, i] + binom[1, j]
                c += 1
    return ed, ei


@njit(cache=True)
def _filtration_argsort(d, i):
    # stable sort by (diameter asc, index desc)
    order = np.argsort(-i, kind="mergesort")
    order = order[np.argsort(d[order], kind="mergesort")]
    return order


@njit(cache=True)
def dim0_pairs(n, dist, ed, ei, binom, thresh, with_columns):
    """Kruskal pass; returns H0 deaths, essential count and dim-1 columns."""
    verts = np.empty(4, dtype=np.int64)
    buf = np.empty(4, dtype=np.int64)
    order = _filtration_argsort(ed, ei)
    parent = np.arange(n)
    deaths = np.empty(n, dtype=np.float64)
    nd = 0
    keep = np.zeros(ed.shape[0], dtype=np.bool_)
    for t in range(order.shape[0]):
        e = order[t]
        _vertices(ei[e], 1, n, binom, verts)
        a = _find(parent, verts[0])
        b = _find(parent, verts[1])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            if ed[e] > 0.0:
                deaths[nd] = ed[e]
                nd += 1
        elif with_columns:
            if _apparent_cofacet(ei[e], ed[e], 1, n, dist, binom, thresh, buf, verts) == -1:
                keep[e] = True
    roots = 0
    for v in range(n):
        if parent[v] == v:
            roots += 1
    # MST edges never enter the dim-1 reduction (cleared)
    cd = ed[keep]
    ci = ei[keep]
    rev = _filtration_argsort(cd, ci)[::-1]
    return deaths[:nd], roots, cd[rev], ci[rev]


# ---------------------------------------------------------- reduction


@njit(cache=True)
def reduce_dimension(dim, n, dist, binom, thresh, col_d, col_i):
    """Reduce the coboundary columns of ``dim``-simplices.

    ``col_d``/``col_i`` must be in reverse filtration order.  Returns finite
    pairs, essential births and the dict of pivot (dim+1)-simplices used for
    clearing the next dimension.
    """
    verts = np.empty(dim + 3, dtype=np.int64)
    buf = np.empty(dim + 3, dtype=np.int64)
    pivots = Dict.empty(key_type=_INT, value_type=_INT)
    ncol = col_d.shape[0]

    births = np.empty(16, dtype=np.float64)
    deaths = np.empty(16, dtype=np.float64)
    npairs = 0
    ess = np.empty(16, dtype=np.float64)
    ness = 0

    red_off = np.zeros(ncol + 1, dtype=np.int64)
    red_d = np.empty(16, dtype=np.float64)
    red_i = np.empty(16, dtype=np.int64)
    nred = 0

    hd = np.empty(64, dtype=np.float64)
    hi = np.empty(64, dtype=np.int64)
    rd = np.empty(64, dtype=np.float64)
    ri = np.empty(64, dtype=np.int64)

    for j in range(ncol):
        sd = col_d[j]
        si = col_i[j]
        size = 0
        rsize = 0
        red_off[j + 1] = red_off[j]

        # emergent pair: earliest cofacet has the same diameter and is free
        cz = _zero_pivot_cofacet(si, sd, dim, n, dist, binom, thresh, verts)
        if cz != -1 and cz not in pivots:
            if _apparent_facet(cz, sd, dim + 1, n, dist, binom, thresh, verts, buf) == -1:
                pivots[cz] = j
                continue

        hd, hi, size = _push_coboundary(si, sd, dim, n, dist, binom, thresh, verts, hd, hi, size)
        pd, pi, size = _pop_pivot(hd, hi, size)
        while True:
            if pi == -1:
                if ness == ess.shape[0]:
                    tmp = np.empty(2 * ness, dtype=np.float64)
                    tmp[:ness] = ess
                    ess = tmp
                ess[ness] = sd
                ness += 1
                break
            if pi in pivots:
                # pivot was pushed out of the heap by _pop_pivot; restore it
                hd, hi, size = _heap_push(hd, hi, size, pd, pi)
                other = pivots[pi]
                if other >= 0:
                    od = col_d[other]
                    oi = col_i[other]
                    rd, ri, rsize = _heap_push(rd, ri, rsize, od, oi)
                    hd, hi, size = _push_coboundary(oi, od, dim, n, dist, binom, thresh, verts, hd, hi, size)
                    for t in range(red_off[other], red_off[other + 1]):
                        rd, ri, rsize = _heap_push(rd, ri, rsize, red_d[t], red_i[t])
                        hd, hi, size = _push_coboundary(red_i[t], red_d[t], dim, n, dist, binom, thresh, verts, hd, hi, size)
                else:
                    # column of an apparent pair that was never assembled
                    fi = -other - 1
                    fd = _diameter(fi, dim, n, dist, binom, buf)
                    rd, ri, rsize = _heap_push(rd, ri, rsize, fd, fi)
                    hd, hi, size = _push_coboundary(fi, fd, dim, n, dist, binom, thresh, verts, hd, hi, size)
                pd, pi, size = _pop_pivot(hd, hi, size)
                continue
            fa = _apparent_facet(pi, pd, dim + 1, n, dist, binom, thresh, verts, buf)
            if fa != -1:
                pivots[pi] = -fa - 1
                continue
            # new persistence pair
            if pd > sd:
                if npairs == births.shape[0]:
                    tb = np.empty(2 * npairs, dtype=np.float64)
                    tdd = np.empty(2 * npairs, dtype=np.float64)
                    tb[:npairs] = births
                    tdd[:npairs] = deaths
                    births = tb
                    deaths = tdd
                births[npairs] = sd
                deaths[npairs] = pd
                npairs += 1
            pivots[pi] = j
            # store the reduction column, cancelling repeated entries
            while rsize > 0:
                ed_, ei_, rsize = _pop_pivot(rd, ri, rsize)
                if ei_ == -1:
                    break
                if nred == red_d.shape[0]:
                    t1 = np.empty(2 * nred, dtype=np.float64)
                    t2 = np.empty(2 * nred, dtype=np.int64)
                    t1[:nred] = red_d
                    t2[:nred] = red_i
                    red_d = t1
                    red_i = t2
                red_d[nred] = ed_
                red_i[nred] = ei_
                nred += 1
            red_off[j + 1] = nred
            break
    return births[:npairs], deaths[:npairs], ess[:ness], pivots


@njit(cache=True)
def assemble_columns(dim, n, dist, binom, thresh, prev_d, prev_i, pivots, keep_next):
    """Enumerate ``dim``-simplices as cofacets of the ``dim-1``-simplices.

    Returns (all dim-simplices if ``keep_next``, columns to reduce in reverse
    filtration order).  Cleared simplices and apparent-pair members are
    dropped from the columns.
    """
    verts = np.empty(dim + 3, dtype=np.int64)
    buf = np.empty(dim + 3, dtype=np.int64)
    cap = 1024
    nd_ = np.empty(cap if keep_next else 1, dtype=np.float64)
    ni_ = np.empty(cap if keep_next else 1, dtype=np.int64)
    nn = 0
    cd = np.empty(cap, dtype=np.float64)
    ci = np.empty(cap, dtype=np.int64)
    nc = 0
    lower = dim - 1
    for s in range(prev_d.shape[0]):
        idx = prev_i[s]
        diam = prev_d[s]
        _vertices(idx, lower, n, binom, verts)
        idx_below = idx
        idx_above = np.int64(0)
        v = n - 1
        k = lower + 1
        # only cofacets whose new vertex exceeds all vertices of the facet
        while v >= k and binom[k, v] > idx_below:
            c_d = diam
            for a in range(lower + 1):
                w = dist[v, verts[a]]
                if w > c_d:
                    c_d = w
            cidx = idx_above + binom[k + 1, v] + idx_below
            v -= 1
            if c_d > thresh:
                continue
            if keep_next:
                if nn == nd_.shape[0]:
                    t1 = np.empty(2 * nn, dtype=np.float64)
                    t2 = np.empty(2 * nn, dtype=np.int64)
                    t1[:nn] = nd_
                    t2[:nn] = ni_
                    nd_ = t1
                    ni_ = t2
                nd_[nn] = c_d
                ni_[nn] = cidx
                nn += 1
            if cidx in pivots:
                continue
            if _apparent_facet(cidx, c_d, dim, n, dist, binom, thresh, buf, verts) != -1:
                continue
            if _apparent_cofacet(cidx, c_d, dim, n, dist, binom, thresh, buf, verts) != -1:
                continue
            if nc == cd.shape[0]:
                t1 = np.empty(2 * nc, dtype=np.float64)
                t2 = np.empty(2 * nc, dtype=np.int64)
                t1[:nc] = cd
                t2[:nc] = ci
                cd = t1
                ci = t2
            cd[nc] = c_d
            ci[nc] = cidx
            nc += 1
    cd = cd[:nc]
    ci = ci[:nc]
    rev = _filtration_argsort(cd, ci)[::-1]
    return nd_[:nn], ni_[:nn], cd[rev], ci[rev]
