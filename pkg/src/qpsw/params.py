"""Choosing the window size d and the delay tau.

The delay objective sums, over all pairs of spectral lines, the squared
modulus of the inner product between their length-(d+1) exponential
columns.  Small values mean nearly orthogonal columns, hence a well
conditioned sliding-window map.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoValidDelayError
from .spectral import SpectrumPeak

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


def choose_d(peaks: Sequence[SpectrumPeak], symmetric: bool = False, alpha_minus_one: bool = False) -> int:
    """Window size from the number of spectral lines.

    ``symmetric=True`` treats the peaks as the non-negative half of a real
    signal's spectrum and counts every nonzero line twice.
    """
    if not peaks:
        raise ValueError("no spectral content detected")
    if symmetric:
        alpha = sum(1 if p.frequency == 0 else 2 for p in peaks)
    else:
        alpha = len(peaks)
    d = alpha - 1 if alpha_minus_one else alpha
    if d < 1:
        raise ValueError("no spectral content detected")
    return d


def _pair_gaps(frequencies) -> np.ndarray:
    nu = np.asarray(frequencies, dtype=float)
    if len(set(nu.tolist())) != len(nu):
        raise ValueError("frequencies must be distinct")
    i, j = np.triu_indices(len(nu), k=1)
    return nu[j] - nu[i]


def _dirichlet_sq(theta: np.ndarray, d: int) -> np.ndarray:
    # |sum_{m=0}^{d} e^{i m theta}|^2 in closed form; reduce first so both sines stay accurate
    theta = theta - TWO_PI * np.round(theta / TWO_PI)
    half = 0.5 * theta
    den = np.sin(half)
    small = np.abs(theta) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.sin((d + 1) * half) / np.where(small, 1.0, den)) ** 2
    return np.where(small, float((d + 1) ** 2), val)


def gamma(x, frequencies: Sequence[float], d: int):
    """Sum over unordered pairs of squared Dirichlet-kernel moduli at ``gap * x``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    gaps = _pair_gaps(frequencies)
    x_arr = np.asarray(x, dtype=float)
    theta = np.multiply.outer(x_arr, gaps)
    out = _dirichlet_sq(theta, d).sum(axis=-1)
    return float(out) if x_arr.ndim == 0 else out


def gamma_direct(x: float, frequencies: Sequence[float], d: int) -> float:
    """Same objective by explicit summation of the exponentials."""
    total = 0.0
    m = np.arange(d + 1)
    for a, b in itertools.combinations(np.asarray(frequencies, dtype=float), 2):
        total += abs(np.sum(np.exp(1j * (a - b) * x * m))) ** 2
    return float(total)


def default_tau_max(domain_length: float, d: int) -> float:
    """Three quarters of the largest delay whose window still fits the domain."""
    return 0.75 * domain_length / d


def max_grid_step(frequencies: Sequence[float]) -> float:
    """Coarsest admissible grid step, pi over twice the largest frequency gap."""
    gaps = np.abs(_pair_gaps(frequencies))
    return math.pi / (2 * float(gaps.max())) if gaps.size else math.inf


@dataclass(frozen=True)
class DelaySearchConfig:
    tau_max: float
    grid_points: int
    refine_tol: float = 1e-6

    def __post_init__(self):
        if not self.tau_max > 0:
            raise ValueError("tau_max must be positive")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")

    @property
    def step(self) -> float:
        return self.tau_max / (self.grid_points - 1)

    def check(self, frequencies: Sequence[float]) -> None:
        limit = max_grid_step(frequencies)
        if self.step > limit:
            raise ValueError(f"grid step {self.step:.6g} exceeds the admissible {limit:.6g}; raise grid_points")

    @classmethod
    def for_frequencies(
        cls, frequencies: Sequence[float], d: int, tau_max: float, refine_tol: float = 1e-6, oversample: int = 4
    ) -> "DelaySearchConfig":
        """Grid fine enough to resolve every basin of the objective.

        Each pair term oscillates with period ``2 pi / ((d + 1) * gap)`` in its
        main lobes, so the default step is that period over ``2 * oversample``.
        """
        gaps = np.abs(_pair_gaps(frequencies))
        if not gaps.size:
            return cls(tau_max, 2, refine_tol)
        step = math.pi / (oversample * (d + 1) * float(gaps.max()))
        step = min(step, max_grid_step(frequencies))
        return cls(tau_max, int(math.ceil(tau_max / step)) + 1, refine_tol)


def collision_delays(frequencies: Sequence[float], tau_max: float) -> np.ndarray:
    """Delays in ``(0, tau_max]`` at which two nodes coincide on the unit circle."""
    out = []
    for gap in np.abs(_pair_gaps(frequencies)):
        if gap == 0:
            continue
        period = TWO_PI / gap
        count = int(math.floor(tau_max / period))
        out.append(period * np.arange(1, count + 1))
    return np.sort(np.concatenate(out)) if out else np.empty(0)


def _excluded(x: np.ndarray, bad: np.ndarray, width: float) -> np.ndarray:
    mask = x <= 0
    if bad.size:
        pos = np.searchsorted(bad, x)
        left = np.abs(x - bad[np.clip(pos - 1, 0, bad.size - 1)])
        right = np.abs(bad[np.clip(pos, 0, bad.size - 1)] - x)
        mask |= np.minimum(left, right) <= width
    return mask


def minimize_gamma(
    frequencies: Sequence[float], d: int, config: DelaySearchConfig, candidates: int = 8
) -> tuple[float, float]:
    """Grid search on ``[0, tau_max]`` followed by golden-section refinement.

    The best ``candidates`` grid-local minima are each refined and the
    smallest refined value wins, ties going to the smaller delay.  Delays
    within one grid step of a node collision, and zero, are never returned.
    """
    config.check(frequencies)
    grid = np.linspace(0.0, config.tau_max, config.grid_points)
    step = config.step
    bad = collision_delays(frequencies, config.tau_max + step)
    values = gamma(grid, frequencies, d)
    banned = _excluded(grid, bad, step)
    if banned.all():
        raise NoValidDelayError("no valid delay in range")

    vals = np.where(banned, np.inf, values)
    left = np.concatenate([[np.inf], vals[:-1]])
    right = np.concatenate([vals[1:], [np.inf]])
    local = np.flatnonzero((vals <= left) & (vals <= right) & np.isfinite(vals))
    local = local[np.lexsort((local, vals[local]))][:candidates]

    best = None
    f = lambda x: gamma(x, frequencies, d)  # noqa: E731
    for i in local:
        tau = _golden(f, grid, i, config)
        if _excluded(np.array([tau]), bad, step)[0] or not 0 < tau <= config.tau_max:
            tau = float(grid[i])
        val = f(tau)
        if best is None or val < best[1] - 1e-12 * max(1.0, abs(best[1])) or (
            abs(val - best[1]) <= 1e-12 * max(1.0, abs(best[1])) and tau < best[0]
        ):
            best = (tau, val)
    log.debug("gamma minimiser %.9g with value %.6g", best[0], best[1])
    return float(best[0]), float(best[1])


def _golden(f, grid, i, config) -> float:
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    mid = grid[i]
    if not (f(mid) < f(lo) and f(mid) < f(hi)):
        # flat or boundary bracket: fall back to a bounded search in the cell
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": config.refine_tol})
        return float(res.x) if res.fun <= f(mid) else float(mid)
    xtol = config.refine_tol / max(abs(mid), 1e-300)
    res = minimize_scalar(f, bracket=(lo, mid, hi), method="golden", options={"xtol": xtol})
    return float(res.x)


# --- tau sweeps -------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    tau: float
    dim: int
    rank: int
    persistence: float


def persistence_vs_tau_sweep(
    source,
    d: int,
    tau_values: Sequence[float],
    times: Sequence[float],
    landmarks: int,
    seed: int,
    top_q: int = 3,
    dims: Sequence[int] = (1,),
    threshold: float = math.inf,
) -> list[SweepRow]:
    """Top persistence values per dimension as a function of the delay.

    Each delay gets its own landmark seed derived from ``(seed, index)``.
    Infinite bars are ignored; ranks beyond the number of bars read 0.
    """
    from .embedding import EmbeddingParams, distance_matrix, maxmin_sample, sliding_window
    from .persistence.rips import rips_persistence

    if len(tau_values) == 0:
        raise ValueError("tau_values must be nonempty")
    dims = sorted(set(int(j) for j in dims))
    rows: list[SweepRow] = []
    for index, tau in enumerate(tau_values):
        cloud = sliding_window(source, EmbeddingParams(d, float(tau)), times)
        entry_seed = int(np.random.SeedSequence([int(seed), index]).generate_state(1)[0])
        picks = maxmin_sample(cloud, min(landmarks, len(cloud)), entry_seed)
        dist = distance_matrix(cloud.subset(picks))
        diagrams = rips_persistence(dist, max(dims), threshold)
        for j in dims:
            top = diagrams[j].finite().top(top_q)
            for r, p in enumerate(top, start=1):
                rows.append(SweepRow(float(tau), j, r, float(p)))
        log.info("sweep tau=%.6g done (%d/%d)", tau, index + 1, len(tau_values))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "dim", "rank", "persistence"])
    for r in rows:
        writer.writerow([repr(r.tau), r.dim, r.rank, repr(r.persistence)])
    return buf.getvalue()


def sweep_from_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    return [SweepRow(float(r["tau"]), int(r["dim"]), int(r["rank"]), float(r["persistence"])) for r in reader]
