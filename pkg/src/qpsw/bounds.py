"""Vandermonde conditioning and persistence lower bounds.

With nodes ``z_m = exp(i nu_m tau)`` the complex sliding window of a finite
model factors as ``Omega @ x(t)``, where ``Omega[j, m] = z_m ** j`` and
``x(t)`` holds the coefficients times ``exp(i nu_m t)``.  The smallest
singular value of ``Omega`` controls how much the torus bars can shrink.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import NodeCollisionError, RankDeficiencyError
from .persistence.analytic import _check_magnitudes, _run, multiplicity_mu

DISTINCT = "distinct"
LITERAL = "literal"
_COLLISION_TOL = 1e-9
SQRT3 = math.sqrt(3.0)


def nodes(frequencies: Sequence[float], tau: float) -> np.ndarray:
    return np.exp(1j * np.asarray(frequencies, dtype=float) * tau)


def _check_nodes(frequencies, tau) -> np.ndarray:
    nu = np.asarray(frequencies, dtype=float)
    if len(set(nu.tolist())) != len(nu):
        raise ValueError("frequencies must be distinct")
    z = nodes(nu, tau)
    for a, b in itertools.combinations(range(len(z)), 2):
        if abs(z[a] - z[b]) < _COLLISION_TOL:
            raise NodeCollisionError(
                f"tau violates structure theorem exclusion: frequencies {nu[a]!r} and {nu[b]!r} give the same node"
            )
    return z


def vandermonde(frequencies: Sequence[float], tau: float, d: int) -> np.ndarray:
    """``(d + 1) x alpha`` matrix with entries ``exp(i nu_m tau j)``."""
    if d < 0:
        raise ValueError("d must be non-negative")
    _check_nodes(frequencies, tau)
    nu = np.asarray(frequencies, dtype=float)
    return np.exp(1j * tau * np.outer(np.arange(d + 1), nu))


def _jacobi_singular_values(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 80) -> np.ndarray:
    # one-sided (Hestenes) Jacobi: rotate column pairs until all are orthogonal
    u = np.array(a, dtype=complex, copy=True)
    cols = u.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = float(np.vdot(u[:, p], u[:, p]).real)
                beta = float(np.vdot(u[:, q], u[:, q]).real)
                gamma = np.vdot(u[:, p], u[:, q])
                g = abs(gamma)
                if g == 0 or g <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2 * g)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                up = u[:, p].copy()
                uq = u[:, q] * np.conj(phase)
                u[:, p] = c * up - s * uq
                u[:, q] = (s * up + c * uq) * phase
        if not rotated:
            break
    return np.sort(np.linalg.norm(u, axis=0))


def singular_values(matrix) -> np.ndarray:
    """All singular values, ascending.  Wide matrices are transposed first."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError("need a nonempty 2-D matrix")
    if a.shape[1] > a.shape[0]:
        a = a.conj().T
    return _jacobi_singular_values(a)


def sigma_extremes(matrix) -> tuple[float, float]:
    """``(sigma_min, sigma_max)`` of a full-column-rank complex matrix."""
    a = np.asarray(matrix, dtype=complex)
    sv = singular_values(a)
    smin, smax = float(sv[0]), float(sv[-1])
    if a.shape[1] > a.shape[0] or smin < 1e-12 * smax:
        raise RankDeficiencyError(f"matrix is rank deficient (sigma_min={smin:.3e}, sigma_max={smax:.3e})")
    return smin, smax


def delta_omega(frequencies: Sequence[float], tau: float) -> float:
    """Smallest normalised arc separation ``arcsin(|z_l - z_m| / 2) / pi`` between nodes."""
    if len(frequencies) < 2:
        raise ValueError("need at least two frequencies")
    z = _check_nodes(frequencies, tau)
    chords = [abs(z[a] - z[b]) for a, b in itertools.combinations(range(len(z)), 2)]
    return min(math.asin(min(1.0, c / 2)) / math.pi for c in chords)


def sigma_min_floor(d: int, delta: float) -> float:
    """Certified lower bound ``sqrt(d + 3/2 - 1/delta)`` on sigma_min."""
    if not 0 < delta <= 0.5:
        raise ValueError("delta_omega must lie in (0, 1/2]")
    slack = d + 1.5 - 1.0 / delta
    if not slack > 0:
        raise ValueError("d too small for node separation")
    return math.sqrt(slack)


@dataclass(frozen=True)
class VandermondeReport:
    nodes: tuple[complex, ...]
    d: int
    sigma_min: float
    sigma_max: float
    condition_number: float
    delta_omega: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["nodes"] = [[z.real, z.imag] for z in self.nodes]
        return out


def vandermonde_report(frequencies: Sequence[float], tau: float, d: int) -> VandermondeReport:
    omega = vandermonde(frequencies, tau, d)
    smin, smax = sigma_extremes(omega)
    delta = delta_omega(frequencies, tau) if len(frequencies) > 1 else 0.5
    return VandermondeReport(tuple(complex(z) for z in nodes(frequencies, tau)), d, smin, smax, smax / smin, delta)


def guaranteed_count(magnitudes, n: int, j: int, mode: str = DISTINCT) -> int:
    """Number of degree-``j`` bars the bound at level ``n`` guarantees.

    ``literal`` adds ``mu_j(m)`` for every ``m <= n``; ``distinct`` adds it once
    per run of equal magnitudes, which avoids counting tied bars twice.
    """
    mags = _check_magnitudes(magnitudes)
    if not 1 <= n <= len(mags):
        raise ValueError(f"level n must lie in 1..{len(mags)}")
    if mode == LITERAL:
        return sum(multiplicity_mu(mags, j, m) for m in range(1, n + 1))
    if mode != DISTINCT:
        raise ValueError("mode must be 'distinct' or 'literal'")
    # runs are contiguous since magnitudes are sorted; include the whole run of n
    last = int(_run(mags, n).max())
    total, m = 0, 1
    while m <= last:
        total += multiplicity_mu(mags, j, m)
        m = int(_run(mags, m).max()) + 1
    return total


@dataclass(frozen=True)
class BoundReport:
    level_n: int
    magnitude: float
    sigma_min: float
    d: int
    tail: float
    hausdorff: float
    bound_value: float
    guaranteed_count_per_dim: dict = field(default_factory=dict)
    mode: str = DISTINCT

    def to_dict(self) -> dict:
        out = asdict(self)
        out["guaranteed_count_per_dim"] = {str(k): v for k, v in self.guaranteed_count_per_dim.items()}
        return out


def bound_value(magnitude: float, sigma_min: float, d: int, tail: float = 0.0, hausdorff: float = 0.0) -> float:
    return SQRT3 * magnitude * sigma_min - 4 * math.sqrt(d + 1) * tail - 4 * hausdorff


def lower_bound(
    magnitudes,
    n: int,
    sigma_min: float,
    d: int,
    tail: float = 0.0,
    hausdorff: float = 0.0,
    mode: str = DISTINCT,
) -> BoundReport:
    """Persistence level guaranteed for the bars tied to the ``n`` largest coefficients."""
    mags = _check_magnitudes(magnitudes)
    if not 1 <= n <= len(mags):
        raise ValueError(f"level n must lie in 1..{len(mags)}")
    if tail < 0 or hausdorff < 0 or sigma_min < 0:
        raise ValueError("tail, hausdorff and sigma_min must be non-negative")
    mag = float(mags[n - 1])
    counts = {j: guaranteed_count(mags, n, j, mode) for j in range(1, len(mags) + 1)}
    value = bound_value(mag, sigma_min, d, tail, hausdorff)
    return BoundReport(n, mag, float(sigma_min), d, float(tail), float(hausdorff), value, counts, mode)


def approximation_bound(d: int, tail: float, kind: str = "bottleneck") -> float:
    """Distance between the windows of f and of a truncation with sup error ``tail``.

    ``bottleneck`` bounds the diagram distance, ``hausdorff`` the point clouds.
    """
    if tail < 0:
        raise ValueError("tail must be non-negative")
    factor = {"bottleneck": 2.0, "hausdorff": 1.0}.get(kind)
    if factor is None:
        raise ValueError("kind must be 'bottleneck' or 'hausdorff'")
    return factor * math.sqrt(d + 1) * tail
