"""Render rate-energy tradeoff curves to an image file."""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

__all__ = ["save_re_figure"]

_MARKERS = ("o", "s", "^", "v", "D", "x", "*", "+")


def save_re_figure(curves, path, *, title: str | None = None) -> Path:
    """Plot mean rate against energy threshold, one line per curve."""
    path = Path(path)
    fig = Figure(figsize=(6.8, 4.6), dpi=150)
    ax = fig.add_subplot(111)
    for k, curve in enumerate(curves):
        qs = [p.q for p in curve.points]
        rates = [p.mean_rate for p in curve.points]
        ax.plot(qs, rates, marker=_MARKERS[k % len(_MARKERS)], markersize=4,
                linewidth=1.2, label=curve.scheme)
    ax.set_xlabel("harvested-energy threshold Q (J)")
    ax.set_ylabel("mean achievable rate (bit/channel use)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    return path
