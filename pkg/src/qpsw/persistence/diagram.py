"""Persistence diagram container, JSON codec and persistent Betti counts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

HALF_OPEN = "half_open"  # [birth, death), computed Rips bars
LEFT_OPEN = "left_open"  # (birth, death], analytic circle/torus bars
CONVENTIONS = (HALF_OPEN, LEFT_OPEN)


def _as_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.size == 0:
        arr = np.empty((0, 2), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be an (n, 2) array of (birth, death)")
    return arr


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of ``(birth, death)`` pairs in one homological dimension.

    Deaths may be ``inf``.  ``convention`` records the interval type so that
    :func:`betti_count` knows whether endpoints are included.
    """

    dimension: int
    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    convention: str = HALF_OPEN

    def __post_init__(self):
        arr = _as_pairs(self.pairs)
        if self.dimension < 0:
            raise ValueError("dimension must be non-negative")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown interval convention {self.convention!r}")
        if arr.size and (np.any(arr[:, 0] < 0) or np.any(arr[:, 0] >= arr[:, 1])):
            raise ValueError("every pair needs 0 <= birth < death")
        # canonical order: by birth, then death
        arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))].copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pairs", arr)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def births(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.pairs[:, 1]

    def persistence(self) -> np.ndarray:
        return self.pairs[:, 1] - self.pairs[:, 0]

    def top(self, q: int) -> np.ndarray:
        """The ``q`` largest persistence values, descending, zero-padded."""
        pers = np.sort(self.persistence())[::-1][:q]
        return np.concatenate([pers, np.zeros(max(0, q - len(pers)))])

    def finite(self) -> "PersistenceDiagram":
        keep = np.isfinite(self.pairs[:, 1])
        return PersistenceDiagram(self.dimension, self.pairs[keep], self.convention)

    def count_above(self, level: float) -> int:
        """Number of pairs with persistence at least ``level``."""
        return int(np.sum(self.persistence() >= level))

    def as_multiset(self) -> list[tuple[float, float]]:
        return sorted((float(b), float(d)) for b, d in self.pairs)

    def to_dict(self) -> dict:
        return {
            "dim": int(self.dimension),
            "convention": self.convention,
            "pairs": [[_enc(b), _enc(d)] for b, d in self.pairs],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PersistenceDiagram":
        pairs = [[_dec(b), _dec(d)] for b, d in obj.get("pairs", [])]
        return cls(int(obj["dim"]), pairs, obj.get("convention", HALF_OPEN))

    def __repr__(self) -> str:
        return f"PersistenceDiagram(dim={self.dimension}, n={len(self)}, {self.convention})"


def _enc(x: float):
    return "inf" if math.isinf(x) else float(x)


def _dec(x) -> float:
    if isinstance(x, str):
        if x.lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValueError(f"bad diagram coordinate {x!r}")
    return float(x)


def dump_diagrams(diagrams: Iterable[PersistenceDiagram], **extra) -> str:
    payload = dict(extra)
    payload["diagrams"] = [d.to_dict() for d in diagrams]
    return json.dumps(payload, indent=2, sort_keys=True)


def load_diagrams(text: str) -> list[PersistenceDiagram]:
    obj = json.loads(text)
    if isinstance(obj, dict) and "diagrams" in obj:
        obj = obj["diagrams"]
    if isinstance(obj, dict):
        obj = [obj]
    return [PersistenceDiagram.from_dict(o) for o in obj]


def betti_count(diagram: PersistenceDiagram, eps: float, eps_prime: float) -> int:
    """Persistent Betti number: bars containing the closed interval [eps, eps'].

    Half-open bars ``[a, b)`` need ``a <= eps`` and ``eps' < b``; left-open
    bars ``(a, b]`` need ``a < eps`` and ``eps' <= b``.
    """
    if eps > eps_prime:
        raise ValueError("betti_count needs eps <= eps_prime")
    b, d = diagram.births, diagram.deaths
    if diagram.convention == HALF_OPEN:
        mask = (b <= eps) & (eps_prime < d)
    else:
        mask = (b < eps) & (eps_prime <= d)
    return int(np.sum(mask))
