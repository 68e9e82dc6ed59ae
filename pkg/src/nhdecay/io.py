"""Flat-file output: CSV tables, line-oriented summaries and bare SVG plots.

Floats are written with 17 significant digits so every value round-trips
exactly and identical runs give byte-identical files.
"""
from __future__ import annotations

import csv
import enum
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


def fmt(x) -> str:
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if x is None:
        return "none"
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def trajectory_rows(traj):
    return zip(traj.times, traj.c_a.real, traj.c_a.imag, traj.P_a)


def write_trajectory(path, traj) -> Path:
    return write_csv(path, ["t", "re_ca", "im_ca", "pa"], trajectory_rows(traj))


def write_snapshots(path, traj) -> Path | None:
    if traj.snapshots is None:
        return None

    def rows():
        for t, prof in zip(traj.snapshot_times, traj.snapshots):
            for n, c in zip(traj.sites, prof):
                yield t, n, c.real, c.imag

    return write_csv(path, ["t", "n", "re_cn", "im_cn"], rows())


def format_summary(record: Mapping[str, object]) -> str:
    """``key = value`` lines, keys left-aligned to a common width."""
    if not record:
        return ""
    width = max(len(k) for k in record)
    return "".join(f"{k:<{width}} = {fmt(v)}\n" for k, v in record.items())


def parse_summary(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if "=" in line and not line.lstrip().startswith("#"):
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def write_summary(path, record: Mapping[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_summary(record))
    return path


# -- SVG ------------------------------------------------------------------------

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def write_svg(
    path,
    series: Sequence[tuple[np.ndarray, np.ndarray, str]],
    *,
    title: str = "",
    xlabel: str = "t",
    ylabel: str = "",
    hlines: Sequence[tuple[float, str]] = (),
    width: int = 640,
    height: int = 400,
    max_points: int = 2000,
) -> Path:
    """Line plot of ``(x, y, label)`` series as a standalone SVG file."""
    left, right, top, bottom = 70, 20, 30, 50
    xs = np.concatenate([np.asarray(s[0], float) for s in series])
    ys = np.concatenate([np.asarray(s[1], float) for s in series] + [np.array([h for h, _ in hlines], float)])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x1 = x0 + 1.0
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (np.asarray(x, float) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - np.asarray(y, float)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x0, x1):
        out.append(f'<text x="{px(tx):.2f}" y="{top + ph + 18}" text-anchor="middle">{tx:g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<text x="{left - 6}" y="{py(ty) + 4:.2f}" text-anchor="end">{ty:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
            f'transform="rotate(-90 14 {top + ph / 2})">{ylabel}</text>'
        )
    if title:
        out.append(f'<text x="{left + pw / 2}" y="18" text-anchor="middle">{title}</text>')
    for h, label in hlines:
        out.append(
            f'<line x1="{left}" x2="{left + pw}" y1="{py(h):.2f}" y2="{py(h):.2f}" '
            f'stroke="gray" stroke-dasharray="6,4"><title>{label}</title></line>'
        )
    for i, (x, y, label) in enumerate(series):
        x, y = np.asarray(x, float), np.asarray(y, float)
        stride = max(1, x.size // max_points)
        keep = np.isfinite(y[::stride])
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x[::stride][keep]), py(y[::stride][keep])))
        colour = _COLOURS[i % len(_COLOURS)]
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{left + pw - 8}" y="{top + 16 + 14 * i}" text-anchor="end" fill="{colour}">{label}</text>'
        )
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
