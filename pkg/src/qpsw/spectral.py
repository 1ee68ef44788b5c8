"""DFT moduli of sampled signals and prominent-peak extraction."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .model import Signal

HANN = "hann"


@dataclass(frozen=True)
class SpectrumPeak:
    frequency: float  # rad per unit time
    frequency_hz: float
    amplitude: float
    bin_index: int


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Moduli of the normalised DFT on an ascending frequency grid.

    ``signed`` spectra cover negative and positive frequencies and wrap
    around at the Nyquist limit; one-sided spectra start at DC.
    """

    frequency: np.ndarray  # rad per unit time
    modulus: np.ndarray
    signed: bool
    bin_width: float  # rad per unit time

    @property
    def frequency_hz(self) -> np.ndarray:
        return self.frequency / (2 * math.pi)

    def __iter__(self):
        return iter(zip(self.frequency.tolist(), self.modulus.tolist()))

    def __len__(self) -> int:
        return len(self.frequency)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["freq_rad", "freq_hz", "modulus"])
        for w, h, m in zip(self.frequency, self.frequency_hz, self.modulus):
            writer.writerow([repr(float(w)), repr(float(h)), repr(float(m))])
        return buf.getvalue()


def spectrum(signal: Signal, signed: bool | None = None, window: str | None = None) -> Spectrum:
    """Normalised DFT moduli.

    A unit-coefficient exponential sitting on a bin yields modulus 1.  Real
    signals default to the non-negative half; pass ``signed=True`` for the
    full range.  ``window="hann"`` tapers the samples first and renormalises
    by the window sum.
    """
    n = len(signal)
    if n < 2:
        raise ValueError("spectrum needs at least two samples")
    if signed is None:
        signed = not signal.is_real
    x = signal.samples
    if window is None:
        norm = float(n)
    elif window == HANN:
        taper = scipy.signal.windows.hann(n, sym=False)
        x = x * taper
        norm = float(taper.sum())
    else:
        raise ValueError(f"unknown window {window!r}")
    coeffs = np.fft.fft(x) / norm
    freqs = 2 * math.pi * np.fft.fftfreq(n, d=1.0 / signal.sample_rate)
    if signed:
        freqs, coeffs = np.fft.fftshift(freqs), np.fft.fftshift(coeffs)
    else:
        half = n // 2 + 1
        freqs, coeffs = np.abs(freqs[:half]), coeffs[:half]
    bin_width = 2 * math.pi * signal.sample_rate / n
    return Spectrum(freqs, np.abs(coeffs), bool(signed), bin_width)


def _neighbours(spec: Spectrum) -> tuple[np.ndarray, int]:
    m = spec.modulus
    if spec.signed:
        # a periodic grid: wrap one bin each side
        return np.concatenate([m[-1:], m, m[:1]]), 1
    # mirror through DC, close the top end
    return np.concatenate([m[1:2], m, [-np.inf]]), 1


def find_peaks(
    spec: Spectrum,
    min_height: float = 0.0,
    min_separation: float = 0.0,
    separation_unit: str = "rad",
) -> list[SpectrumPeak]:
    """Local maxima above ``min_height``, thinned greedily by separation.

    Peaks are visited in decreasing modulus and kept when they are at least
    ``min_separation`` away from every kept peak.  Each kept peak is refined
    by fitting a parabola to the log-modulus of the three bins around it.
    ``separation_unit`` is ``"rad"`` (per unit time), ``"hz"`` or ``"bins"``.
    """
    if min_height < 0 or min_separation < 0:
        raise ValueError("thresholds must be non-negative")
    if separation_unit == "hz":
        min_separation = 2 * math.pi * min_separation
    elif separation_unit == "bins":
        min_separation = min_separation * spec.bin_width
    elif separation_unit != "rad":
        raise ValueError("separation_unit must be 'rad', 'hz' or 'bins'")

    padded, off = _neighbours(spec)
    found, _ = scipy.signal.find_peaks(padded, height=max(min_height, np.finfo(float).tiny))
    idx = found - off
    idx = idx[(idx >= 0) & (idx < len(spec))]

    refined = [_refine(spec, padded, i, off) for i in idx]
    order = sorted(range(len(idx)), key=lambda p: (-refined[p][1], idx[p]))
    kept: list[SpectrumPeak] = []
    for p in order:
        freq, amp = refined[p]
        if all(abs(freq - k.frequency) >= min_separation for k in kept):
            kept.append(SpectrumPeak(freq, freq / (2 * math.pi), amp, int(idx[p])))
    return kept


def _refine(spec: Spectrum, padded: np.ndarray, i: int, off: int) -> tuple[float, float]:
    tiny = np.finfo(float).tiny
    a, b, c = (math.log(max(float(v), tiny)) for v in padded[i + off - 1 : i + off + 2])
    denom = a - 2 * b + c
    if denom >= 0 or not np.isfinite(denom):
        return float(spec.frequency[i]), float(spec.modulus[i])
    shift = 0.5 * (a - c) / denom
    freq = float(spec.frequency[i]) + shift * spec.bin_width
    if not spec.signed and freq < 0:
        freq = 0.0
    return freq, math.exp(b - 0.25 * (a - c) * shift)


def peaks_to_json(peaks: list[SpectrumPeak]) -> list[dict]:
    return [{"freq": p.frequency, "hz": p.frequency_hz, "amp": p.amplitude} for p in peaks]


def peaks_from_json(text: str) -> list[SpectrumPeak]:
    obj = json.loads(text)
    if isinstance(obj, dict):
        obj = obj["peaks"]
    return [SpectrumPeak(float(p["freq"]), float(p.get("hz", p["freq"] / (2 * math.pi))), float(p["amp"]), -1) for p in obj]


def signed_peaks(peaks: list[SpectrumPeak]) -> list[SpectrumPeak]:
    """Mirror one-sided peaks of a real signal to their negative partners."""
    out = list(peaks)
    for p in peaks:
        if p.frequency > 0:
            out.append(SpectrumPeak(-p.frequency, -p.frequency_hz, p.amplitude, -p.bin_index))
    return out
