"""SVG rendering of shell curves with matplotlib (Agg, no display needed)."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..metrics import Crossing, Curve  # noqa: E402
from .curves import _as_named, check_common_axis  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.fonttype": "none",
    "svg.hashsalt": "corrinfo",
    "path.simplify": False,
}

COLORS = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#17a589"]


def _add_freq_axes(ax, nyquist: float, unit: str) -> None:
    ax.set_xlabel("spatial frequency (fraction of Nyquist)")
    ax.set_xlim(0.0, 1.0)
    top = ax.secondary_xaxis(
        "top", functions=(lambda f: f * nyquist, lambda a: a / nyquist)
    )
    top.set_xlabel(f"spatial frequency ({unit})")


def render_plot(
    curves,
    path: str | os.PathLike,
    threshold: Curve | None = None,
    crossing: Crossing | None = None,
    title: str | None = None,
    ylabel: str = "value",
    unit: str = "1/Å",
    style: dict | None = None,
) -> dict:
    """Plot one or more curves on a common shell axis into an SVG file.

    The lower axis is the fraction of Nyquist, the upper one the absolute
    frequency.  ``threshold`` is drawn dashed; ``crossing`` adds a marker at
    the interpolated frequency.  Returns a summary of what was drawn.
    """
    named = _as_named(curves)
    check_common_axis(named)
    if threshold is not None:
        check_common_axis({**named, "threshold": threshold})
    ref = next(iter(named.values()))
    path = Path(path)
    drawn = []
    with plt.rc_context({**STYLE, **(style or {})}):
        fig, ax = plt.subplots()
        try:
            for i, (name, c) in enumerate(named.items()):
                (line,) = ax.plot(c.freq_frac, c.values, color=COLORS[i % len(COLORS)], label=name)
                line.set_gid(f"curve-{name}")
                drawn.append(name)
            if threshold is not None:
                (line,) = ax.plot(
                    threshold.freq_frac, threshold.values, "--", color="0.35", label="threshold"
                )
                line.set_gid("threshold")
                drawn.append("threshold")
            crossing_frac = None
            if crossing is not None:
                crossing_frac = crossing.frequency / ref.nyquist
                y = float(np.interp(crossing_frac, ref.freq_frac, ref.values))
                (mark,) = ax.plot(
                    [crossing_frac], [y], "o", mfc="none", mec="k", ms=7,
                    label=f"crossing {crossing.resolution:.4g}" if crossing.crossed else "no crossing",
                )
                mark.set_gid("crossing")
            ax.axhline(0.0, color="0.6", lw=0.6)
            ax.set_ylabel(ylabel)
            _add_freq_axes(ax, ref.nyquist, unit)
            if title:
                ax.set_title(title, pad=28)
            ax.legend(loc="best")
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return {"path": str(path), "lines": drawn, "crossing_frac": crossing_frac}


DECOMPOSITION_PANELS = (
    ("c", "fsc_ab", "FSC(A, B)"),
    ("h", "t_n1n2", "N1 · N2*"),
    ("i", "t_sn1", "N1 · S*"),
    ("j", "t_sn2", "S · N2*"),
)


def render_decomposition(curves: dict[str, Curve], path: str | os.PathLike, style: dict | None = None) -> Path:
    """Four-panel layout: FSC(A,B), noise-noise, and the two signal-noise terms.

    The three term panels share one y range so their sizes compare directly.
    """
    missing = [key for _, key, _ in DECOMPOSITION_PANELS if key not in curves]
    if missing:
        raise ValueError(f"missing decomposition curves: {missing}")
    check_common_axis({key: curves[key] for _, key, _ in DECOMPOSITION_PANELS})
    terms = np.concatenate([curves[k].values[1:] for _, k, _ in DECOMPOSITION_PANELS[1:]])
    lim = float(np.max(np.abs(terms))) * 1.05 or 1.0
    path = Path(path)
    with plt.rc_context({**STYLE, "figure.figsize": (8.0, 6.0), **(style or {})}):
        fig, axes = plt.subplots(2, 2)
        try:
            for ax, (tag, key, label) in zip(axes.flat, DECOMPOSITION_PANELS):
                c = curves[key]
                (line,) = ax.plot(c.freq_frac, c.values, color=COLORS[0], label=label)
                line.set_gid(f"panel-{tag}")
                ax.axhline(0.0, color="0.6", lw=0.6)
                ax.set_xlim(0.0, 1.0)
                ax.set_xlabel("fraction of Nyquist")
                ax.set_title(f"({tag}) {label}", loc="left")
                if key != "fsc_ab":
                    ax.set_ylim(-lim, lim)
                    ax.set_ylabel("shell sum / N(r)")
                else:
                    ax.set_ylim(-0.1, 1.05)
                    ax.set_ylabel("correlation")
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path
