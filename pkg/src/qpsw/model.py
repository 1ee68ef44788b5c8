"""Spectral models of quasiperiodic functions and sampled signals.

A :class:`SpectralModel` is a finite trigonometric sum
``f(t) = sum_k c_k exp(i nu_k t)``.  When the model also carries a base
frequency vector ``omega`` every term is indexed by an integer lattice vector
``k`` with ``nu_k = <k, omega>``, which is what truncation to the box
``|k|_inf <= K`` and the rank computations need.

A :class:`Signal` is the discrete counterpart: uniformly spaced complex
samples with a sample rate and a start time.
"""

from __future__ import annotations

import csv
import io
import json
import math
import wave
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import EmptySignalError

_FREQ_RTOL = 1e-9


@dataclass(frozen=True)
class FourierTerm:
    frequency: float
    coefficient: complex
    lattice: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        if self.lattice is not None:
            object.__setattr__(self, "lattice", tuple(int(v) for v in self.lattice))

    @property
    def sup_norm(self) -> int:
        """``|k|_inf`` of the lattice vector."""
        if self.lattice is None:
            raise ValueError("lattice-indexed model required")
        return max((abs(v) for v in self.lattice), default=0)


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Finite sum of complex exponentials, optionally lattice-indexed.

    Terms with zero coefficient are dropped on construction.  Frequencies
    must be distinct and, when ``frequency_vector`` is given, each lattice
    vector must reproduce its term's frequency.
    """

    terms: tuple[FourierTerm, ...] = ()
    frequency_vector: tuple[float, ...] | None = None

    def __post_init__(self):
        terms = tuple(t for t in self.terms if t.coefficient != 0)
        object.__setattr__(self, "terms", terms)
        freqs = [t.frequency for t in terms]
        if len(set(freqs)) != len(freqs):
            raise ValueError("term frequencies must be distinct")
        omega = self.frequency_vector
        if omega is None:
            return
        omega = tuple(float(w) for w in omega)
        object.__setattr__(self, "frequency_vector", omega)
        if not omega or any(w <= 0 for w in omega):
            raise ValueError("frequency vector entries must be positive")
        for t in terms:
            if t.lattice is None:
                continue
            if len(t.lattice) != len(omega):
                raise ValueError(f"lattice vector {t.lattice} has wrong length for N={len(omega)}")
            expected = float(np.dot(t.lattice, omega))
            if abs(expected - t.frequency) > _FREQ_RTOL * max(1.0, abs(expected)):
                raise ValueError(f"term frequency {t.frequency} does not match <k, omega> = {expected}")

    @classmethod
    def from_lattice(cls, omega: Sequence[float], coefficients: dict) -> "SpectralModel":
        """Build a model from ``{k: coefficient}`` with frequencies ``<k, omega>``."""
        terms = [FourierTerm(float(np.dot(k, omega)), c, tuple(k)) for k, c in coefficients.items()]
        return cls(tuple(terms), tuple(omega))

    @property
    def N(self) -> int | None:
        return None if self.frequency_vector is None else len(self.frequency_vector)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([t.frequency for t in self.terms], dtype=float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], dtype=complex)

    @property
    def is_lattice_indexed(self) -> bool:
        return self.frequency_vector is not None and all(t.lattice is not None for t in self.terms)

    def is_real(self, rtol: float = 1e-12) -> bool:
        """True when the spectrum is conjugate-symmetric, i.e. f is real."""
        lookup = {t.frequency: t.coefficient for t in self.terms}
        for t in self.terms:
            other = lookup.get(-t.frequency)
            if other is None or abs(other - t.coefficient.conjugate()) > rtol * abs(t.coefficient):
                return False
        return True

    def __call__(self, t) -> np.ndarray:
        """Evaluate ``sum c exp(i nu t)``; accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for term in self.terms:
            out += term.coefficient * np.exp(1j * term.frequency * t)
        return out

    def to_dict(self) -> dict:
        terms = []
        for t in self.terms:
            entry = {"freq": t.frequency, "re": t.coefficient.real, "im": t.coefficient.imag}
            if t.lattice is not None:
                entry["k"] = list(t.lattice)
            terms.append(entry)
        out = {"terms": terms}
        if self.frequency_vector is not None:
            out["omega"] = list(self.frequency_vector)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SpectralModel":
        omega = obj.get("omega")
        terms = []
        for entry in obj.get("terms", []):
            k = entry.get("k")
            if "freq" in entry:
                freq = float(entry["freq"])
            elif k is not None and omega is not None:
                freq = float(np.dot(k, omega))
            else:
                raise ValueError("term needs 'freq' or both 'k' and model 'omega'")
            coeff = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            terms.append(FourierTerm(freq, coeff, None if k is None else tuple(k)))
        return cls(tuple(terms), None if omega is None else tuple(omega))


def load_model(path) -> SpectralModel:
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        raise EmptySignalError()
    return SpectralModel.from_dict(json.loads(text))


def save_model(model: SpectralModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled complex time series; sample ``n`` sits at ``t0 + n / rate``."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex).reshape(-1)
        if samples.size == 0:
            raise EmptySignalError()
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.samples) - 1) / self.sample_rate

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) / self.sample_rate

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.samples.imag == 0))


@dataclass(frozen=True, eq=False)
class LatticeSupport:
    vectors: tuple[tuple[int, ...], ...]
    K: int

    def __post_init__(self):
        vecs = tuple(tuple(int(v) for v in vec) for vec in self.vectors)
        if len(set(vecs)) != len(vecs):
            raise ValueError("duplicate lattice vectors")
        for vec in vecs:
            if max((abs(v) for v in vec), default=0) > self.K:
                raise ValueError(f"{vec} lies outside the box |k| <= {self.K}")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def of(cls, model: SpectralModel) -> "LatticeSupport":
        if not model.is_lattice_indexed:
            raise ValueError("lattice-indexed model required")
        K = max((t.sup_norm for t in model.terms), default=0)
        return cls(tuple(t.lattice for t in model.terms), K)


def synthesize(model: SpectralModel, n_samples: int, sample_rate: float, t0: float = 0.0) -> Signal:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if not sample_rate > 0:
        raise ValueError("sample_rate must be positive")
    times = t0 + np.arange(n_samples) / sample_rate
    values = model(times)
    if model.is_real():
        # drop the rounding residue so the signal is flagged real
        values = values.real
    return Signal(values, sample_rate, t0)


def truncate(model: SpectralModel, K: int) -> SpectralModel:
    """Keep the terms with ``|k|_inf <= K``."""
    if not model.is_lattice_indexed:
        raise ValueError("lattice-indexed model required")
    kept = tuple(t for t in model.terms if t.sup_norm <= K)
    return SpectralModel(kept, model.frequency_vector)


def estimate_coefficient(signal: Signal, frequency: float) -> complex:
    """Trapezoidal estimate of ``(1/L) * integral f(t) exp(-i nu t) dt`` over the signal."""
    n = len(signal)
    if n < 2:
        raise ValueError("need at least two samples")
    dt = 1.0 / signal.sample_rate
    weights = np.full(n, dt)
    weights[0] = weights[-1] = dt / 2
    phase = np.exp(-1j * frequency * signal.times)
    return complex(np.sum(weights * signal.samples * phase) / signal.duration)


def tail_sup_bound(model: SpectralModel, K: int) -> float:
    """Sum of ``|c_k|`` over ``|k|_inf > K``, an upper bound on ``|f - S_K f|_inf``."""
    if not model.is_lattice_indexed:
        raise ValueError("lattice-indexed model required")
    return float(sum(abs(t.coefficient) for t in model.terms if t.sup_norm > K))


def smoothness_tail_bound(N: int, r: int, K: int, derivative_tail_norms: Sequence[float]) -> float:
    """Tail bound from ``r`` square-integrable derivatives of the parent function.

    ``derivative_tail_norms[n]`` is the L2 norm on the torus of the r-th partial
    derivative along coordinate ``n``.
    """
    norms = np.asarray(derivative_tail_norms, dtype=float)
    if len(norms) != N:
        raise ValueError(f"expected {N} derivative norms, got {len(norms)}")
    if not 2 * r > N:
        raise ValueError("smoothness condition r > N/2 violated")
    if K < 1:
        raise ValueError("K must be >= 1")
    if np.any(norms < 0):
        raise ValueError("derivative norms must be non-negative")
    sphere_area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    factor = sphere_area * N**r / (K ** (2 * r - N) * (2 * r - N))
    return math.sqrt(factor * float(np.sum(norms**2)))


def _bareiss_rank(rows: list[list[int]]) -> int:
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    n_rows, n_cols = len(mat), len(mat[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        p = mat[rank][col]
        for r in range(rank + 1, n_rows):
            for c in range(col + 1, n_cols):
                # exact division is guaranteed by Sylvester's identity
                mat[r][c] = (p * mat[r][c] - mat[r][col] * mat[rank][c]) // prev
            mat[r][col] = 0
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def lattice_rank(support: LatticeSupport | Iterable[Sequence[int]]) -> int:
    """Rank over Q of a set of integer vectors, by fraction-free elimination."""
    vectors = support.vectors if isinstance(support, LatticeSupport) else support
    rows = [[int(v) for v in vec] for vec in vectors]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError("lattice vectors must share one length")
    return _bareiss_rank(rows)


def minimal_spanning_K(model: SpectralModel) -> int:
    """Smallest box radius whose truncated support has full rank N."""
    if not model.is_lattice_indexed:
        raise ValueError("lattice-indexed model required")
    N = model.N
    for K in sorted({t.sup_norm for t in model.terms}):
        if lattice_rank(t.lattice for t in model.terms if t.sup_norm <= K) == N:
            return K
    raise ValueError("support rank deficient")


def kronecker_orbit(beta: Sequence[float], times: Sequence[float]) -> np.ndarray:
    """Rows ``t * beta mod 2 pi`` for each ``t``."""
    beta = np.asarray(beta, dtype=float)
    if beta.size == 0:
        raise ValueError("beta must be nonempty")
    return np.mod(np.outer(np.asarray(times, dtype=float), beta), 2 * math.pi)


def spline_resample(signal: Signal, query_times) -> np.ndarray:
    """Natural cubic spline through the samples, real and imaginary parts separately."""
    q = np.asarray(query_times, dtype=float)
    times = signal.times
    slack = 1e-9 * max(1.0, abs(signal.t0), abs(signal.t_end))
    if q.size and (q.min() < signal.t0 - slack or q.max() > signal.t_end + slack):
        raise ValueError("extrapolation not supported")
    if len(signal) < 2:
        return np.full(q.shape, signal.samples[0])
    q = np.clip(q, signal.t0, signal.t_end)
    s = signal.samples
    re = CubicSpline(times, s.real, bc_type="natural")(q)
    im = CubicSpline(times, s.imag, bc_type="natural")(q) if not signal.is_real else np.zeros_like(re)
    out = re + 1j * im
    # the spline reproduces knots only up to rounding at interval ends
    pos = np.clip(np.searchsorted(times, q), 0, len(times) - 1)
    on_knot = times[pos] == q
    out[on_knot] = s[pos[on_knot]]
    return out


# --- signal files -----------------------------------------------------------


def read_signal_csv(path, sample_rate: float | None = None) -> Signal:
    """Read ``t,re,im`` or ``t,value`` rows; the rate is inferred from ``t``."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptySignalError()
    header = [h.strip().lower() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise EmptySignalError()
    data = np.array([[float(c) for c in r] for r in body])
    if header[:3] == ["t", "re", "im"]:
        samples = data[:, 1] + 1j * data[:, 2]
    elif header[:2] == ["t", "value"]:
        samples = data[:, 1].astype(complex)
    else:
        raise ValueError("signal CSV header must be 't,re,im' or 't,value'")
    t = data[:, 0]
    if sample_rate is None:
        if len(t) < 2:
            raise ValueError("cannot infer sample rate from a single row")
        dt = (t[-1] - t[0]) / (len(t) - 1)
        if not dt > 0 or not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12 * max(1.0, abs(t[-1]))):
            raise ValueError("signal CSV times must be uniformly spaced and increasing")
        sample_rate = 1.0 / dt
    return Signal(samples, sample_rate, float(t[0]))


def write_signal_csv(signal: Signal, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if signal.is_real:
        writer.writerow(["t", "value"])
        for t, s in zip(signal.times, signal.samples):
            writer.writerow([repr(float(t)), repr(float(s.real))])
    else:
        writer.writerow(["t", "re", "im"])
        for t, s in zip(signal.times, signal.samples):
            writer.writerow([repr(float(t)), repr(float(s.real)), repr(float(s.imag))])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_wav(path) -> Signal:
    """16-bit PCM mono WAV, scaled to [-1, 1]."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1 or wf.getsampwidth() != 2:
            raise ValueError("only 16-bit PCM mono WAV is supported")
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    data = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    if data.size == 0:
        raise EmptySignalError()
    return Signal(data, float(rate), 0.0)


def write_wav(signal: Signal, path, peak: float | None = None) -> None:
    """Write the real part as 16-bit PCM; ``peak`` sets the full-scale value.

    By default the signal is scaled so its largest magnitude maps to
    full scale; an all-zero signal is written as silence.
    """
    rate = int(round(signal.sample_rate))
    if abs(rate - signal.sample_rate) > 1e-9 * signal.sample_rate:
        raise ValueError("WAV output needs an integer sample rate")
    x = signal.samples.real
    scale = peak if peak is not None else float(np.max(np.abs(x)))
    if scale > 0:
        x = x / scale
    pcm = np.clip(np.round(x * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())


def load_signal(path, **kwargs) -> Signal:
    """Dispatch on the file suffix: ``.csv`` or ``.wav``."""
    suffix = str(path).lower().rsplit(".", 1)[-1]
    if suffix == "wav":
        return read_wav(path)
    if suffix == "csv":
        return read_signal_csv(path, **kwargs)
    raise ValueError(f"unsupported signal format '.{suffix}'")
