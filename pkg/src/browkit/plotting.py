"""Figure and chart emission.

Two output flavors, both deterministic byte-for-byte for fixed inputs:

* Minimal static SVG line charts written directly (one ``<polyline>`` per
  contiguous present run, so dropout gaps are real gaps, never bridged).
* matplotlib PNG figures rendered next to every delimited report, the
  human-readable companion to the CSVs.
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PALETTE = ("#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")

_SVG_W, _SVG_H = 640, 360
_SVG_PAD = 40


def _runs(x: np.ndarray, y: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a series into contiguous finite runs."""
    ok = np.isfinite(np.asarray(y, dtype=float))
    runs = []
    start = None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((x[start:i], y[start:i]))
            start = None
    if start is not None:
        runs.append((x[start:], y[start:]))
    return [r for r in runs if len(r[0]) >= 1]


def write_svg_chart(
    series: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
    title: str = "",
) -> None:
    """Write named (x, y) series as polylines in one SVG. NaN y-values split lines."""
    xs_all = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys_all = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    ys_fin = ys_all[np.isfinite(ys_all)]
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo = float(ys_fin.min()) if ys_fin.size else 0.0
    y_hi = float(ys_fin.max()) if ys_fin.size else 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(v):
        return _SVG_PAD + (v - x_lo) / (x_hi - x_lo) * (_SVG_W - 2 * _SVG_PAD)

    def sy(v):
        return _SVG_H - _SVG_PAD - (v - y_lo) / (y_hi - y_lo) * (_SVG_H - 2 * _SVG_PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_SVG_PAD}" y1="{_SVG_H - _SVG_PAD}" x2="{_SVG_W - _SVG_PAD}" '
        f'y2="{_SVG_H - _SVG_PAD}" stroke="#444" stroke-width="1"/>',
        f'<line x1="{_SVG_PAD}" y1="{_SVG_PAD}" x2="{_SVG_PAD}" '
        f'y2="{_SVG_H - _SVG_PAD}" stroke="#444" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_SVG_W / 2:.0f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    for i, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        for rx, ry in _runs(x, y):
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(rx, ry))
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{_SVG_W - _SVG_PAD + 4}" y="{_SVG_PAD + 14 * i}" fill="{color}" '
            f'font-family="sans-serif" font-size="11" text-anchor="end">{name}</text>'
        )
    parts.append("</svg>")

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(parts) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="png", dpi=110, metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)


def save_series_figure(
    series: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
    title: str = "",
    xlabel: str = "frame",
    ylabel: str = "value",
) -> None:
    """Line chart of named series; NaNs leave gaps."""
    fig, ax = plt.subplots(figsize=(7.5, 4.2))
    for i, (name, (x, y)) in enumerate(series.items()):
        ax.plot(x, y, label=name, color=PALETTE[i % len(PALETTE)], lw=1.4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    _save(fig, path)


def save_aggregate_figure(aggregates: dict, path: str | Path, title: str = "") -> None:
    """Mean lines with +-1 sd bands, one per condition."""
    fig, ax = plt.subplots(figsize=(7.5, 4.2))
    for i, (cond, agg) in enumerate(sorted(aggregates.items())):
        color = PALETTE[i % len(PALETTE)]
        ax.plot(agg.x, agg.mean, color=color, lw=1.6, label=f"{cond} (n={agg.n_traces})")
        ax.fill_between(
            agg.x, agg.mean - agg.sd, agg.mean + agg.sd, color=color, alpha=0.18, lw=0
        )
    ax.set_xlabel("normalized frame")
    ax.set_ylabel("scaled brow distance")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    _save(fig, path)


def save_deviation_figure(rows, path: str | Path, title: str = "") -> None:
    """Grouped bars: one group per (distance, condition, brow kind), one bar per tracker."""
    plain = [r for r in rows if "_vs_" not in r.tracker]
    trackers = sorted({r.tracker for r in plain})
    groups = sorted({(r.distance_group, r.condition, r.brow_kind) for r in plain})
    by = {(r.tracker, r.distance_group, r.condition, r.brow_kind): r.deviation for r in plain}

    fig, ax = plt.subplots(figsize=(max(7.5, 1.1 * len(groups)), 4.2))
    width = 0.8 / max(len(trackers), 1)
    for ti, tracker in enumerate(trackers):
        xs, ys = [], []
        for gi, g in enumerate(groups):
            val = by.get((tracker, *g))
            if val is not None:
                xs.append(gi + ti * width)
                ys.append(val)
        ax.bar(xs, ys, width=width, label=tracker, color=PALETTE[ti % len(PALETTE)])
    ax.set_xticks([gi + 0.4 - width / 2 for gi in range(len(groups))])
    ax.set_xticklabels(["\n".join(g) for g in groups], fontsize=7)
    ax.set_ylabel("deviation")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


_FACE_SEGMENTS = (
    ("inner_eye_L", "inner_eye_R"),
    ("outer_brow_L", "inner_brow_L"),
    ("inner_brow_R", "outer_brow_R"),
    ("inner_eye_L", "upper_nose"),
    ("upper_nose", "inner_eye_R"),
)


def face_outline_series(points: dict[str, np.ndarray], flip_y: bool = False):
    """(x, y) polyline segments sketching brows, eye line, and nose from role points."""
    sign = -1.0 if flip_y else 1.0
    segs = []
    for a, b in _FACE_SEGMENTS:
        if a in points and b in points:
            segs.append(
                (
                    np.array([points[a][0], points[b][0]]),
                    sign * np.array([points[a][1], points[b][1]]),
                )
            )
    return segs


def save_head_model_figure(
    snapshots: dict[str, dict[str, np.ndarray]],
    path: str | Path,
    title: str = "",
    flip_y: bool = False,
) -> None:
    """Overlay derotated face sketches from several time points."""
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    for i, (label, points) in enumerate(snapshots.items()):
        color = PALETTE[i % len(PALETTE)]
        for j, (x, y) in enumerate(face_outline_series(points, flip_y=flip_y)):
            ax.plot(x, y, color=color, lw=1.5, label=label if j == 0 else None)
        xs = [p[0] for p in points.values()]
        ys = [(-p[1] if flip_y else p[1]) for p in points.values()]
        ax.scatter(xs, ys, s=12, color=color)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
