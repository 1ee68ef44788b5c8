"""Sliding-window point clouds, maxmin landmarks and distances."""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import directed_hausdorff, pdist, squareform

from .model import Signal, SpectralModel, spline_resample

EUCLIDEAN = "euclidean"
MAX = "max"
_MAGIC = b"QPSWDIST"


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points in R^D with the times that generated them.

    ``complex_windows`` marks clouds whose coordinates interleave the real
    and imaginary parts of complex windows.
    """

    points: np.ndarray
    times: np.ndarray | None = None
    complex_windows: bool = False

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (m, D) array with D >= 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.times is not None:
            times = np.array(self.times, dtype=float).reshape(-1)
            if len(times) != len(pts):
                raise ValueError("times and points differ in length")
            times.setflags(write=False)
            object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def subset(self, indices) -> "PointCloud":
        idx = np.asarray(indices, dtype=int)
        times = None if self.times is None else self.times[idx]
        return PointCloud(self.points[idx], times, self.complex_windows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = [f"x{i}" for i in range(self.dimension)]
        writer.writerow((["t"] if self.times is not None else []) + cols)
        for n, row in enumerate(self.points):
            lead = [repr(float(self.times[n]))] if self.times is not None else []
            writer.writerow(lead + [repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointCloud":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if len(rows) < 2:
            raise ValueError("point cloud CSV has no rows")
        header = [h.strip() for h in rows[0]]
        data = np.array([[float(c) for c in r] for r in rows[1:]])
        if header[0] == "t":
            return cls(data[:, 1:], data[:, 0])
        return cls(data)


@dataclass(frozen=True)
class EmbeddingParams:
    d: int
    tau: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be an integer >= 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def span(self) -> float:
        return self.d * self.tau


def _flatten(windows: np.ndarray, complex_valued: bool) -> np.ndarray:
    if not complex_valued:
        return np.ascontiguousarray(windows.real)
    flat = np.empty((windows.shape[0], 2 * windows.shape[1]))
    flat[:, 0::2] = windows.real
    flat[:, 1::2] = windows.imag
    return flat


def sliding_window(source: Signal | SpectralModel, params: EmbeddingParams, times: Sequence[float]) -> PointCloud:
    """Rows ``(f(t), f(t + tau), ..., f(t + d tau))`` for each ``t``.

    Models are evaluated exactly; signals through a natural cubic spline.
    Complex windows are flattened to interleaved (re, im) coordinates.
    """
    t = np.asarray(times, dtype=float).reshape(-1)
    offsets = params.tau * np.arange(params.d + 1)
    grid = t[:, None] + offsets[None, :]
    if isinstance(source, SpectralModel):
        values = source(grid)
        complex_valued = not source.is_real()
    elif isinstance(source, Signal):
        latest = source.t_end - params.span
        slack = 1e-9 * max(1.0, abs(source.t_end))
        if t.size and (t.max() > latest + slack or t.min() < source.t0 - slack):
            raise ValueError(
                f"window exceeds signal domain: starts must lie in [{source.t0!r}, {latest!r}] "
                f"(maximal feasible start time {latest!r})"
            )
        values = spline_resample(source, grid.reshape(-1)).reshape(grid.shape)
        complex_valued = not source.is_real
    else:
        raise TypeError("source must be a Signal or a SpectralModel")
    return PointCloud(_flatten(values, complex_valued), t, complex_valued)


def feasible_times(signal: Signal, params: EmbeddingParams) -> np.ndarray:
    """Sample times whose full window stays inside the signal."""
    times = signal.times
    return times[times <= signal.t_end - params.span + 1e-9 * max(1.0, abs(signal.t_end))]


def maxmin_sample(cloud: PointCloud, m: int, seed: int, return_radii: bool = False):
    """Greedy farthest-point landmarks.

    The first index comes from ``numpy.random.default_rng(seed)``; each next
    index maximises the distance to the chosen set, lowest index on ties.
    With ``return_radii`` also returns the covering radius after each pick,
    which is non-increasing.
    """
    n = len(cloud)
    if not 1 <= m <= n:
        raise ValueError(f"cannot pick {m} landmarks from {n} points")
    pts = cloud.points
    rng = np.random.default_rng(seed)
    first = int(rng.integers(n))
    chosen = np.empty(m, dtype=int)
    chosen[0] = first
    dmin = np.linalg.norm(pts - pts[first], axis=1)
    taken = np.zeros(n, dtype=bool)
    taken[first] = True
    radii = np.empty(m)
    for k in range(1, m):
        cand = np.where(taken, -1.0, dmin)
        nxt = int(np.argmax(cand))
        radii[k - 1] = dmin[nxt]
        chosen[k] = nxt
        taken[nxt] = True
        dmin = np.minimum(dmin, np.linalg.norm(pts - pts[nxt], axis=1))
    radii[m - 1] = float(np.max(np.where(taken, 0.0, dmin))) if m < n else 0.0
    return (chosen, radii) if return_radii else chosen


def distance_matrix(cloud: PointCloud | np.ndarray, metric: str = EUCLIDEAN) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    if metric == EUCLIDEAN:
        name = "euclidean"
    elif metric == MAX:
        name = "chebyshev"
    else:
        raise ValueError(f"unknown metric {metric!r}")
    if len(pts) < 2:
        return np.zeros((len(pts), len(pts)))
    # condensed form computes each pair once, so the square is symmetric to the bit
    return squareform(pdist(pts, metric=name), checks=False)


def hausdorff_distance(a: PointCloud | np.ndarray, b: PointCloud | np.ndarray) -> float:
    pa = a.points if isinstance(a, PointCloud) else np.atleast_2d(np.asarray(a, dtype=float))
    pb = b.points if isinstance(b, PointCloud) else np.atleast_2d(np.asarray(b, dtype=float))
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("hausdorff distance needs nonempty sets")
    if pa.shape[1] != pb.shape[1]:
        raise ValueError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    return float(max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0]))


def write_distance_matrix(dist: np.ndarray, path, metric: str = EUCLIDEAN) -> None:
    """Strict lower triangle, row-major little-endian float64, after a JSON header."""
    n = len(dist)
    header = json.dumps({"n": n, "metric": metric}, sort_keys=True).encode()
    rows, cols = np.tril_indices(n, k=-1)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(np.asarray(dist, dtype="<f8")[rows, cols].tobytes())


def read_distance_matrix(path) -> tuple[np.ndarray, str]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_MAGIC):
        raise ValueError("not a distance matrix file")
    (hlen,) = struct.unpack_from("<I", blob, len(_MAGIC))
    start = len(_MAGIC) + 4
    header = json.loads(blob[start : start + hlen])
    n = int(header["n"])
    tri = np.frombuffer(blob, dtype="<f8", offset=start + hlen)
    if len(tri) != n * (n - 1) // 2:
        raise ValueError("distance matrix file is truncated")
    dist = np.zeros((n, n))
    rows, cols = np.tril_indices(n, k=-1)
    dist[rows, cols] = tri
    dist[cols, rows] = tri
    return dist, header.get("metric", EUCLIDEAN)
