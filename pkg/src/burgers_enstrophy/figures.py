"""Figure data and self-contained SVG line plots."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .field_core import PeriodicGrid
from .initial_data import DataFamily, sample, scan_F
from .line_shock import LineShockSolution, halfline_diagnostics

__all__ = ["FIGURES", "line_plot_svg", "write_csv", "make_figure"]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"]


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def line_plot_svg(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    path: str | Path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 640,
    height: int = 420,
) -> None:
    """Write a standalone SVG with one polyline per (label, x, y) series."""
    left, right, top, bottom = 70, 20, 40, 50
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    for i, (label, x, y) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if label:
            ly = top + 16 + 16 * i
            out.append(f'<line x1="{left + pw - 120}" y1="{ly - 4}" x2="{left + pw - 100}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + pw - 95}" y="{ly}">{escape(label)}</text>')
    out.append(f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>'
    )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def write_csv(path: str | Path, header: Sequence[str], columns: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) for v in row])


def _fig1(out: Path) -> list[Path]:
    grid = PeriodicGrid(1024)
    inst = sample(DataFamily.instant(20.0), grid)
    gen = sample(DataFamily.general(20.0, 5.0), grid)
    files = [out / "fig1_instant.csv", out / "fig1_general.csv", out / "fig1.svg"]
    write_csv(files[0], ["x", "u0"], [grid.points, inst.values])
    write_csv(files[1], ["x", "u0"], [grid.points, gen.values])
    line_plot_svg(
        [("l = k = 20", grid.points, inst.values), ("k = 20, l = 5", grid.points, gen.values)],
        files[2], "initial data", "x", "u0",
    )
    return files


def _shock_figure(out: Path, prefix: str, solution, profile_taus, tau_grid) -> list[Path]:
    xi = np.linspace(-12.0, 12.0, 481)
    files = []
    profile_series = []
    for tau in profile_taus:
        w = np.asarray(solution(xi, tau))
        path = out / f"{prefix}_profile_tau{tau:g}.csv"
        write_csv(path, ["xi", "w"], [xi, w])
        files.append(path)
        profile_series.append((f"tau = {tau:g}", xi, w))
    E, R = zip(*(halfline_diagnostics(solution, float(t), rtol=1e-9) for t in tau_grid))
    path = out / f"{prefix}_enstrophy.csv"
    write_csv(path, ["tau", "E", "R"], [tau_grid, E, R])
    files.append(path)
    svg = out / f"{prefix}_profiles.svg"
    line_plot_svg(profile_series, svg, f"a = {solution.a:g}: w(xi, tau)", "xi", "w")
    files.append(svg)
    svg = out / f"{prefix}_E.svg"
    line_plot_svg([("E", tau_grid, E), ("2/3", [tau_grid[0], tau_grid[-1]], [2 / 3, 2 / 3])], svg,
                  f"a = {solution.a:g}: half-line enstrophy", "tau", "E")
    files.append(svg)
    svg = out / f"{prefix}_R.svg"
    line_plot_svg([("R", tau_grid, R)], svg, f"a = {solution.a:g}: half-line rate", "tau", "R")
    files.append(svg)
    return files


def _fig2(out: Path) -> list[Path]:
    return _shock_figure(
        out, "fig2", LineShockSolution.closed_a4(), [0.0, 1.0, 2.0, 4.0, 8.0], np.linspace(0.0, 20.0, 81)
    )


def _fig3(out: Path) -> list[Path]:
    files = _shock_figure(
        out, "fig3", LineShockSolution.general(10.0), [0.0, 2.0, 5.0, 10.0, 20.0], np.linspace(0.0, 40.0, 17)
    )
    # Only profiles and E are shown for this a.
    r_svg = out / "fig3_R.svg"
    r_svg.unlink()
    return [f for f in files if f != r_svg]


def _fscan(out: Path) -> list[Path]:
    l = np.linspace(0.5, 10.0, 191)
    F = scan_F(l)
    files = [out / "F_scan.csv", out / "F_scan.svg"]
    write_csv(files[0], ["l", "F"], [l, F])
    line_plot_svg(
        [("F(l)", l, F), ("1/(4 pi^2)", [l[0], l[-1]], [1 / (4 * math.pi**2)] * 2)],
        files[1], "Poincare ratio of the initial data", "l", "F",
    )
    return files


FIGURES = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "F-scan": _fscan}


def make_figure(which: str, out_dir: str | Path) -> list[Path]:
    from .errors import ValidationError

    if which not in FIGURES:
        raise ValidationError(f"unknown figure {which!r}; choose from {sorted(FIGURES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return FIGURES[which](out)
