"""Write sweep results as ``results.csv`` and a log-x ``plot.svg``."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Dict, List, Tuple
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import EmptyDataError
from .experiment import ResultsTable

CSV_HEADER = ("epsilon", "method", "seed", "test_loss", "train_objective", "rho_used")

# solid / dashed / dotted, as in the usual three-way comparison plots
LINE_STYLES = {
    "GaussDRO": ("#1f4e79", ""),
    "LipschitzReg": ("#b03a2e", "8,5"),
    "PlainERM": ("#333333", "2,4"),
}
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=80, right=170, top=30, bottom=60)


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def results_csv(table: ResultsTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(CSV_HEADER)
    for r in table.sorted().rows:
        w.writerow([fmt(r.epsilon), r.method, r.seed, fmt(r.test_loss),
                    fmt(r.train_objective), fmt(r.rho_used)])
    return buf.getvalue()


def read_results_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def plot_svg(table: ResultsTable, title: str = "") -> str:
    """Mean test loss against epsilon for each method.

    Every plotted point also carries its exact value in ``data-epsilon`` and
    ``data-mean`` attributes so the figure can be checked against the CSV.
    """
    means = table.mean_test_loss()
    if not means:
        raise EmptyDataError("no successful rows to plot")
    eps = sorted({e for d in means.values() for e in d})
    vals = [v for d in means.values() for v in d.values()]
    x_lo, x_hi = math.log10(eps[0]), math.log10(eps[-1])
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo, y_hi = min(vals), max(vals)
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else 0.05 * max(abs(y_hi), 1e-12)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(e: float) -> float:
        return MARGIN["left"] + pw * (math.log10(e) - x_lo) / (x_hi - x_lo)

    def sy(v: float) -> float:
        return MARGIN["top"] + ph * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}"/></g>',
    ]
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="18" text-anchor="middle">'
                   f'{escape(title)}</text>')
    # x ticks at decades plus 2x and 5x
    for k in range(math.floor(x_lo), math.ceil(x_hi) + 1):
        for m in (1, 2, 5):
            e = m * 10.0 ** k
            if x_lo - 1e-12 <= math.log10(e) <= x_hi + 1e-12:
                x = sx(e)
                y0 = MARGIN["top"] + ph
                out.append(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 + 5}" stroke="black"/>')
                out.append(f'<text x="{x:.2f}" y="{y0 + 18}" text-anchor="middle">{e:g}</text>')
    for v in _ticks(y_lo, y_hi):
        y = sy(v)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">epsilon</text>')
    out.append(f'<text transform="translate(18,{MARGIN["top"] + ph / 2:.2f}) rotate(-90)" '
               f'text-anchor="middle">mean test loss</text>')

    for i, (method, curve) in enumerate(sorted(means.items())):
        color, dash = LINE_STYLES.get(method, ("#555555", "4,2,1,2"))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        pts = " ".join(f"{sx(e):.3f},{sy(v):.3f}" for e, v in curve.items())
        out.append(f'<g class="series" data-method="{escape(method)}">')
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        for e, v in curve.items():
            out.append(f'<circle cx="{sx(e):.3f}" cy="{sy(v):.3f}" r="2.5" fill="{color}" '
                       f'data-epsilon="{fmt(e)}" data-mean="{fmt(v)}"/>')
        out.append("</g>")
        ly = MARGIN["top"] + 20 + 22 * i
        lx = WIDTH - MARGIN["right"] + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{lx + 38}" y="{ly + 4}">{escape(method)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def read_plot_means(path) -> Dict[str, Dict[float, float]]:
    """Recover ``{method: {epsilon: mean}}`` from a plot written by :func:`plot_svg`."""
    import xml.etree.ElementTree as ET

    ns = {"s": "http://www.w3.org/2000/svg"}
    root = ET.parse(path).getroot()
    out: Dict[str, Dict[float, float]] = {}
    for g in root.findall("s:g[@class='series']", ns):
        curve = out.setdefault(g.get("data-method"), {})
        for c in g.findall("s:circle", ns):
            curve[float(c.get("data-epsilon"))] = float(c.get("data-mean"))
    return out


def emit_report(table: ResultsTable, out_dir, title: str = "") -> Tuple[Path, Path]:
    """Write ``results.csv`` and ``plot.svg`` into ``out_dir`` (created if needed)."""
    if not len(table):
        raise EmptyDataError("results table is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = out / "results.csv", out / "plot.svg"
    with open(csv_path, "w", newline="") as fh:
        fh.write(results_csv(table))
    has_ok = any(r.ok for r in table.rows)
    svg = plot_svg(table, title) if has_ok else (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">'
        '<text x="20" y="40">no successful runs</text></svg>\n')
    svg_path.write_text(svg)
    return csv_path, svg_path
