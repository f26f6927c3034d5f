"""Deterministic CSV, SVG, and manifest writers.

Floats print with %.17g (shortest round-trip for doubles), rows are written in
a caller-fixed order, and newlines are always "\n", so identical inputs yield
byte-identical files. SVGs are minimal hand-built line plots and heatmaps; the
CSV files are the ground truth, the SVGs a convenience.
"""

import hashlib
import json
import time

import numpy as np


def format_value(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows):
    """Write rows (iterables of numbers/strings) and return the file's sha256."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    data = ("\n".join(lines) + "\n").encode()
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def write_text(path, text):
    data = text.encode()
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


# -- minimal SVG ---------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _coords(vals, lo, hi, out_lo, out_hi):
    vals = np.asarray(vals, dtype=float)
    span = hi - lo if hi > lo else 1.0
    return out_lo + (vals - lo) / span * (out_hi - out_lo)


def svg_line_plot(path, x, series, title="", xlabel="", ylabel="", width=640, height=420):
    """Polyline plot of {label: y-array} against shared x. Returns sha256."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    all_y = np.concatenate(list(ys.values()))
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    mL, mR, mT, mB = 56, 16, 34, 42
    px = _coords(x, x_lo, x_hi, mL, width - mR)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    # axes
    parts.append(
        f'<line x1="{mL}" y1="{height-mB}" x2="{width-mR}" y2="{height-mB}" stroke="black"/>'
    )
    parts.append(f'<line x1="{mL}" y1="{mT}" x2="{mL}" y2="{height-mB}" stroke="black"/>')
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        xp = mL + frac * (width - mL - mR)
        yp = height - mB - frac * (height - mT - mB)
        parts.append(
            f'<text x="{xp:.1f}" y="{height-mB+16}" text-anchor="middle" font-size="11">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{mL-6}" y="{yp+4:.1f}" text-anchor="end" font-size="11">{yv:.4g}</text>'
        )
    parts.append(
        f'<text x="{(mL+width-mR)/2:.1f}" y="{height-8}" text-anchor="middle" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{(mT+height-mB)/2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {(mT+height-mB)/2:.1f})">{ylabel}</text>'
    )
    for i, (label, y) in enumerate(ys.items()):
        py = _coords(y, y_lo, y_hi, height - mB, mT)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width-mR-6}" y="{mT+16*(i+1)}" text-anchor="end" font-size="12" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return write_text(path, "\n".join(parts) + "\n")


def _heat_color(t):
    # dark blue -> yellow, linear in t [0,1]
    r = int(255 * t)
    g = int(220 * t + 20 * (1 - t))
    b = int(60 * t + 160 * (1 - t))
    return f"rgb({r},{g},{b})"


def svg_heatmap(path, w_values, b_values, Z, title="", width=560, height=480):
    """Grid heatmap of Z[i, j] over w_values[i] x b_values[j]. Returns sha256."""
    Z = np.asarray(Z, dtype=float)
    nw, nb = Z.shape
    mL, mR, mT, mB = 64, 18, 34, 46
    cw = (width - mL - mR) / nw
    ch = (height - mT - mB) / nb
    lo, hi = float(np.nanmin(Z)), float(np.nanmax(Z))
    span = hi - lo if hi > lo else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for i in range(nw):
        for j in range(nb):
            v = Z[i, j]
            color = "rgb(230,230,230)" if not np.isfinite(v) else _heat_color((v - lo) / span)
            xp = mL + i * cw
            yp = height - mB - (j + 1) * ch
            parts.append(
                f'<rect x="{xp:.2f}" y="{yp:.2f}" width="{cw+0.5:.2f}" height="{ch+0.5:.2f}" '
                f'fill="{color}"/>'
            )
    parts.append(
        f'<text x="{(mL+width-mR)/2:.1f}" y="{height-10}" text-anchor="middle" font-size="12">w</text>'
    )
    parts.append(
        f'<text x="16" y="{(mT+height-mB)/2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {(mT+height-mB)/2:.1f})">b</text>'
    )
    for frac in (0.0, 1.0):
        parts.append(
            f'<text x="{mL + frac*(width-mL-mR):.1f}" y="{height-mB+16}" text-anchor="middle" '
            f'font-size="11">{w_values[0] + frac*(w_values[-1]-w_values[0]):.3g}</text>'
        )
        parts.append(
            f'<text x="{mL-8}" y="{height-mB - frac*(height-mT-mB)+4:.1f}" text-anchor="end" '
            f'font-size="11">{b_values[0] + frac*(b_values[-1]-b_values[0]):.3g}</text>'
        )
    parts.append(
        f'<text x="{width-mR-4}" y="{mT-6}" text-anchor="end" font-size="11">'
        f"range [{lo:.3g}, {hi:.3g}]</text>"
    )
    parts.append("</svg>")
    return write_text(path, "\n".join(parts) + "\n")


def write_manifest(path, config_echo, files, extras=None, version="0.1.0"):
    """JSON manifest: config echo, library version, wall clock, per-file sha256
    checksums, and assumption flags. The manifest itself is excluded from the
    byte-determinism contract (it carries the wall clock)."""
    doc = {
        "version": version,
        "wall_clock_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": config_echo,
        "files": dict(sorted(files.items())),
        "assumptions": extras or {},
    }
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return path
