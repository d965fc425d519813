"""Tiny self-contained SVG plots: histograms, log-log lines, a regime map."""

from __future__ import annotations

from html import escape

import numpy as np

W, H, PAD = 640, 420, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _doc(body: list[str], title: str, comments: dict, timestamp: str | None) -> str:
    head = ['<?xml version="1.0" encoding="UTF-8"?>']
    for k in sorted(comments):
        head.append(f"<!-- {escape(str(k))}: {escape(str(comments[k]))} -->")
    if timestamp:
        head.append(f"<!-- generated: {escape(timestamp)} -->")
    head.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">')
    head.append(f'<rect width="{W}" height="{H}" fill="white"/>')
    head.append(f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _axes(xlo, xhi, ylo, yhi, xlabel, ylabel):
    sx = lambda x: PAD + (x - xlo) / (xhi - xlo) * (W - 2 * PAD)
    sy = lambda y: H - PAD - (y - ylo) / (yhi - ylo) * (H - 2 * PAD)
    body = [
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {H / 2})">{escape(ylabel)}</text>',
        f'<text x="{PAD}" y="{H - PAD + 15}" font-size="10">{xlo:.3g}</text>',
        f'<text x="{W - PAD}" y="{H - PAD + 15}" font-size="10" text-anchor="end">{xhi:.3g}</text>',
        f'<text x="{PAD - 4}" y="{H - PAD}" font-size="10" text-anchor="end">{ylo:.3g}</text>',
        f'<text x="{PAD - 4}" y="{PAD + 4}" font-size="10" text-anchor="end">{yhi:.3g}</text>',
    ]
    return sx, sy, body


def histogram_overlay(samples: dict, title: str = "", bins: int = 60, comments: dict | None = None,
                      timestamp: str | None = None, clip: float = 0.01) -> str:
    """Step histograms of several samples on common bins (central ``1 - 2 clip`` mass)."""
    pooled = np.concatenate([np.asarray(v, dtype=float) for v in samples.values()])
    lo, hi = np.quantile(pooled, [clip, 1 - clip])
    edges = np.linspace(lo, hi, bins + 1)
    dens = {k: np.histogram(np.clip(v, lo, hi), edges, density=True)[0] for k, v in samples.items()}
    ymax = max(float(d.max()) for d in dens.values()) * 1.05 or 1.0
    sx, sy, body = _axes(lo, hi, 0.0, ymax, "value", "density")
    for i, (k, d) in enumerate(dens.items()):
        pts = []
        for j in range(bins):
            pts += [f"{sx(edges[j]):.2f},{sy(d[j]):.2f}", f"{sx(edges[j + 1]):.2f},{sy(d[j]):.2f}"]
        c = COLORS[i % len(COLORS)]
        body.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        body.append(f'<text x="{W - PAD - 5}" y="{PAD + 15 * (i + 1)}" text-anchor="end" font-size="11" fill="{c}">{escape(k)}</text>')
    comments = dict(comments or {})
    comments["bins"] = ",".join(f"{e:.6g}" for e in edges)
    return _doc(body, title, comments, timestamp)


def loglog_plot(x, series: dict, title: str = "", comments: dict | None = None, timestamp: str | None = None) -> str:
    lx = np.log10(np.asarray(x, dtype=float))
    ly = {k: np.log10(np.asarray(v, dtype=float)) for k, v in series.items()}
    allv = np.concatenate(list(ly.values()))
    sx, sy, body = _axes(lx.min(), lx.max(), allv.min(), allv.max() + 1e-12, "log10 x", "log10 y")
    for i, (k, v) in enumerate(ly.items()):
        c = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(lx, v))
        body.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        body.append(f'<text x="{W - PAD - 5}" y="{PAD + 15 * (i + 1)}" text-anchor="end" font-size="11" fill="{c}">{escape(k)}</text>')
    comments = dict(comments or {})
    comments["x"] = ",".join(f"{v:.6g}" for v in x)
    return _doc(body, title, comments, timestamp)


def regime_map(Hs, alphas, labels, title: str = "", comments: dict | None = None, timestamp: str | None = None) -> str:
    """Coloured cells for ``labels[i][j]`` at ``(H_i, alpha_j)``."""
    palette = {"Hermite": "#1f77b4", "Stable": "#d62728", "Mixed": "#2ca02c", "ShortMemoryStable": "#ff7f0e",
               "FiniteVarianceOutOfScope": "#cccccc"}
    Hs, alphas = np.asarray(Hs, float), np.asarray(alphas, float)
    sx, sy, body = _axes(Hs.min(), Hs.max(), alphas.min(), alphas.max(), "H", "alpha")
    dx = (W - 2 * PAD) / max(len(Hs) - 1, 1)
    dy = (H - 2 * PAD) / max(len(alphas) - 1, 1)
    for i, h in enumerate(Hs):
        for j, a in enumerate(alphas):
            c = palette.get(labels[i][j], "#000000")
            body.append(f'<rect x="{sx(h) - dx / 2:.2f}" y="{sy(a) - dy / 2:.2f}" width="{dx:.2f}" height="{dy:.2f}" fill="{c}"/>')
    for k, (name, c) in enumerate(palette.items()):
        body.append(f'<text x="{W - PAD}" y="{PAD + 14 * k}" text-anchor="end" font-size="11" fill="{c}">{name}</text>')
    return _doc(body, title, comments or {}, timestamp)

