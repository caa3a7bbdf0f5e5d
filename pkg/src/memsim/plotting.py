"""Standalone SVG figures for traces, sweep tables and conductance runs.

Figures are built on a bare :class:`matplotlib.figure.Figure` (no pyplot
state).  The SVG id salt and date are pinned so identical data always renders
to identical bytes.  Each data series is wrapped in a group with id
``series-<name>``.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .engine import SimResult
from .experiments import ConductanceRun, DaSweepPoint, LearningCurvePoint
from .signals import Trace

RC = {
    "svg.hashsalt": "memsim",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
}
MAX_POINTS = 4000


def envelope(t: np.ndarray, y: np.ndarray, max_points: int = MAX_POINTS):
    """Min/max decimation that keeps every peak visible."""
    n = len(y)
    if n <= max_points:
        return t, y
    bins = max_points // 2
    edges = np.linspace(0, n, bins + 1).astype(int)
    ts, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = y[a:b]
        i, j = a + int(np.argmin(seg)), a + int(np.argmax(seg))
        for k in sorted((i, j)):
            ts.append(t[k])
            ys.append(y[k])
    return np.array(ts), np.array(ys)


def _plot_trace(ax, name: str, trace: Trace, scale: float = 1.0):
    t, y = envelope(trace.times(), trace.values)
    (line,) = ax.plot(t * 1e3, y * scale, label=name)
    line.set_gid(f"series-{name}")
    return line


def make_figure(data, title: str | None = None) -> Figure:
    """Build (but do not save) the figure for ``data``."""
    if isinstance(data, SimResult):
        data = data.traces
    if isinstance(data, ConductanceRun):
        fig = Figure(figsize=(7, 6))
        axes = fig.subplots(3, 1, sharex=True)
        _plot_trace(axes[0], "da", data.da_trace)
        axes[0].set_ylabel("DA wiper")
        _plot_trace(axes[1], "g", data.g_trace, 1e6)
        axes[1].set_ylabel("conductance (µS)")
        _plot_trace(axes[2], "pulse", data.pulse_trace)
        axes[2].set_ylabel("learning pulse (V)")
        axes[2].set_xlabel("time (ms)")
        for ax in axes:
            ax.legend(loc="upper left")
    elif isinstance(data, dict):
        if not data:
            raise ValueError("nothing to plot: empty probe set")
        fig = Figure(figsize=(7, 3.5))
        ax = fig.subplots()
        for name, trace in data.items():
            _plot_trace(ax, name, trace)
        ax.set_xlabel("time (ms)")
        ax.set_ylabel("V")
        ax.legend(loc="upper right")
    else:
        points = list(data)
        if not points:
            raise ValueError("nothing to plot: empty table")
        fig = Figure(figsize=(5, 3.5))
        ax = fig.subplots()
        if isinstance(points[0], LearningCurvePoint):
            (line,) = ax.plot([p.delta_t * 1e3 for p in points], [p.dw for p in points],
                              "o-", label="dw")
            ax.axhline(0, color="0.5", lw=0.5)
            ax.axvline(0, color="0.5", lw=0.5)
            ax.set_xlabel("Δt (ms)")
            ax.set_ylabel("dw (V)")
        elif isinstance(points[0], DaSweepPoint):
            (line,) = ax.plot([p.wiper for p in points], [p.peak_amplitude for p in points],
                              "o-", label="peak")
            for p in points:
                ax.annotate(p.pot_label, (p.wiper, p.peak_amplitude), fontsize=7,
                            textcoords="offset points", xytext=(3, -10))
            ax.set_xlabel("DA potentiometer wiper")
            ax.set_ylabel("peak learning pulse (V)")
        else:
            raise TypeError(f"cannot plot {type(points[0]).__name__}")
        line.set_gid(f"series-{line.get_label()}")
        ax.legend(loc="best")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def write_plot_svg(data, path, title: str | None = None) -> None:
    """Render ``data`` to a standalone SVG file at ``path``.

    Raises :class:`ValueError` (and writes nothing) when there is no data.
    """
    with matplotlib.rc_context(RC):
        fig = make_figure(data, title)
        try:
            fig.savefig(Path(path), format="svg", metadata={"Date": None})
        except OSError as exc:
            from .output import OutputError
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
