"""CSV rows and dependency-free SVG line plots."""
from __future__ import annotations

import csv
import math
from pathlib import Path

__all__ = ["csv_columns", "write_records", "write_svg_plot", "fmt"]


def fmt(x) -> str:
    """Locale-free text for a CSV cell; NaN and None become empty."""
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def csv_columns(k: int) -> list[str]:
    return (["experiment", "eps", "model", "dofs_limit", "dofs_sieve", "err_l2", "err_h1b"]
            + [f"lam_err_{i + 1}" for i in range(k)]
            + ["heat_sup_err", "passage_ratio", "cg_iters", "wall_ms", "config_hash"])


def write_records(path, records, k: int, config_hash: str, timings: bool = False) -> Path:
    """One row per record; ``wall_ms`` is left empty unless ``timings``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_columns(k))
        for r in records:
            lam = [float(v) for v in r.lam_err] + [float("nan")] * (k - len(r.lam_err))
            w.writerow([r.experiment, fmt(float(r.eps)), r.model, r.dofs_limit, r.dofs_sieve,
                        fmt(float(r.err_l2)), fmt(float(r.err_h1b))] + [fmt(v) for v in lam[:k]]
                       + [fmt(float(r.heat_sup_err)), fmt(float(r.passage_ratio)), r.cg_iters,
                          fmt(float(r.wall_ms)) if timings else "", config_hash])
    return path


_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def write_svg_plot(path, series: dict, title: str = "", xlabel: str = "eps", ylabel: str = "error",
                   width: int = 560, height: int = 400) -> Path:
    """Log-log polyline plot; ``series`` maps a label to ``(x, y)`` sequences.

    Non-positive values are dropped since they have no logarithm.
    """
    pts = {name: [(float(a), float(b)) for a, b in zip(*xy) if a > 0 and b > 0 and math.isfinite(b)]
           for name, xy in series.items()}
    allp = [p for v in pts.values() for p in v]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ml, mr, mt, mb = 70, 150, 40, 50
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>']
    if allp:
        lx = [math.log10(p[0]) for p in allp]
        ly = [math.log10(p[1]) for p in allp]
        x0, x1 = math.floor(min(lx)), math.ceil(max(lx))
        y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1
        pw, ph = width - ml - mr, height - mt - mb

        def X(v):
            return ml + (math.log10(v) - x0) / (x1 - x0) * pw

        def Y(v):
            return mt + ph - (math.log10(v) - y0) / (y1 - y0) * ph

        out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
        for e in range(x0, x1 + 1):
            xx = X(10.0**e)
            out.append(f'<line x1="{xx:.1f}" y1="{mt + ph}" x2="{xx:.1f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{xx:.1f}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">1e{e}</text>')
        for e in range(y0, y1 + 1):
            yy = Y(10.0**e)
            out.append(f'<line x1="{ml - 5}" y1="{yy:.1f}" x2="{ml}" y2="{yy:.1f}" stroke="black"/>')
            out.append(f'<text x="{ml - 8}" y="{yy + 4:.1f}" text-anchor="end" font-size="11">1e{e}</text>')
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>')
        out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
                   f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>')
        for i, (name, p) in enumerate(pts.items()):
            if not p:
                continue
            col = _COLORS[i % len(_COLORS)]
            coords = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in p)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="2"/>')
            for a, b in p:
                out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="3" fill="{col}"/>')
            ly_ = mt + 14 + 16 * i
            out.append(f'<line x1="{ml + pw + 10}" y1="{ly_}" x2="{ml + pw + 30}" y2="{ly_}" stroke="{col}" stroke-width="2"/>')
            out.append(f'<text x="{ml + pw + 34}" y="{ly_ + 4}" font-size="11">{name}</text>')
    else:
        out.append(f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle" font-size="12">'
                   'no positive data</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path
