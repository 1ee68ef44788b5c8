"""Deterministic SVG figures.

Figures are built on bare :class:`matplotlib.figure.Figure` objects (no
pyplot state) with a fixed size, a fixed SVG id salt and no date metadata,
so the same data always yields the same bytes.
"""

from __future__ import annotations

import io
import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "qpsw",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}
_SIZE = (6.4, 4.0)
_DIM_COLORS = ("tab:green", "tab:blue", "tab:orange", "tab:red", "tab:purple")


def _new_figure(size=_SIZE):
    fig = Figure(figsize=size, dpi=100)
    FigureCanvasSVG(fig)
    return fig


def _render(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()


def _with_rc(build):
    def wrapper(*args, **kwargs):
        with matplotlib.rc_context(_RC):
            return _render(build(*args, **kwargs))

    wrapper.__name__ = build.__name__
    wrapper.__doc__ = build.__doc__
    return wrapper


@_with_rc
def signal_svg(times, values, title: str = "signal"):
    fig = _new_figure()
    ax = fig.add_subplot()
    values = np.asarray(values)
    ax.plot(times, values.real, lw=0.6, color="tab:blue", label="re")
    if np.iscomplexobj(values) and np.any(values.imag != 0):
        ax.plot(times, values.imag, lw=0.6, color="tab:orange", label="im")
        ax.legend(loc="upper right")
    ax.set_xlabel("t")
    ax.set_title(title)
    return fig


@_with_rc
def spectrum_svg(freq, modulus, peaks: Sequence = (), title: str = "DFT modulus"):
    """Modulus against angular frequency with peak markers."""
    fig = _new_figure()
    ax = fig.add_subplot()
    ax.plot(freq, modulus, lw=0.6, color="tab:blue")
    if peaks:
        ax.plot([p.frequency for p in peaks], [p.amplitude for p in peaks], "v", color="tab:red", ms=5)
    ax.set_xlabel("frequency (rad / unit time)")
    ax.set_ylabel("modulus")
    ax.set_title(title)
    return fig


@_with_rc
def diagram_svg(diagrams: Sequence, bounds: Sequence[float] = (), title: str = "persistence"):
    """Bars in (birth, persistence) coordinates; bound levels as dashed horizontals.

    Infinite bars are drawn on a line above the largest finite persistence.
    """
    fig = _new_figure((5.2, 4.4))
    ax = fig.add_subplot()
    finite_top = 0.0
    for dg in diagrams:
        fin = dg.pairs[np.isfinite(dg.pairs[:, 1])]
        if len(fin):
            finite_top = max(finite_top, float((fin[:, 1] - fin[:, 0]).max()))
    finite_top = max([finite_top] + [float(b) for b in bounds] + [1e-12])
    inf_level = 1.1 * finite_top
    for dg in diagrams:
        births = dg.pairs[:, 0]
        pers = np.where(np.isinf(dg.pairs[:, 1]), inf_level, dg.pairs[:, 1] - dg.pairs[:, 0])
        color = _DIM_COLORS[dg.dimension % len(_DIM_COLORS)]
        ax.scatter(births, pers, s=10, color=color, label=f"H{dg.dimension}", zorder=3)
    for level in bounds:
        ax.axhline(float(level), ls="--", lw=1.0, color="black")
    if any(np.isinf(dg.pairs[:, 1]).any() for dg in diagrams):
        ax.axhline(inf_level, lw=0.5, color="gray")
    ax.set_xlabel("birth")
    ax.set_ylabel("persistence")
    ax.set_ylim(0, 1.2 * finite_top)
    ax.set_title(title)
    if diagrams:
        ax.legend(loc="upper right")
    return fig


@_with_rc
def sweep_svg(rows: Sequence, title: str = "persistence against delay"):
    """One polyline per (dimension, rank)."""
    fig = _new_figure()
    ax = fig.add_subplot()
    keys = sorted({(r.dim, r.rank) for r in rows})
    for dim, rank in keys:
        sel = sorted((r.tau, r.persistence) for r in rows if r.dim == dim and r.rank == rank)
        xs, ys = zip(*sel)
        color = _DIM_COLORS[dim % len(_DIM_COLORS)]
        ax.plot(xs, ys, lw=1.0, color=color, alpha=1.0 / rank, marker=".", ms=3, label=f"H{dim} #{rank}")
    ax.set_xlabel("tau")
    ax.set_ylabel("persistence")
    ax.set_title(title)
    if keys:
        ax.legend(loc="upper right", fontsize=7)
    return fig


@_with_rc
def orbit_svg(points, axes: tuple[int, int] = (0, 1), title: str = "orbit"):
    """Scatter of two angular coordinates on [0, 2 pi)^2."""
    pts = np.asarray(points, dtype=float)
    fig = _new_figure((4.8, 4.8))
    ax = fig.add_subplot()
    a, b = axes
    ax.scatter(pts[:, a], pts[:, b], s=1, color="tab:blue")
    ax.set_xlim(0, 2 * math.pi)
    ax.set_ylim(0, 2 * math.pi)
    ax.set_aspect("equal")
    ax.set_xlabel(f"theta{a}")
    ax.set_ylabel(f"theta{b}")
    ax.set_title(title)
    return fig
