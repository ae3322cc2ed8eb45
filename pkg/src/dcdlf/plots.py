"""Static SVG summary figure, written without a plotting dependency.

Hand-rolled so two runs with identical inputs produce byte-identical
output (plotting libraries embed generated ids and timestamps).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_W, _H = 640, 300
_PANEL_W, _PANEL_H = 260, 200
_TOP, _LEFT1, _LEFT2 = 50, 50, 360
_BAR_COLORS = {"common": "#4878a8", "distinctive": "#d09048"}


def _fmt(v: float) -> str:
    return format(float(v), ".4f")


def pve_summary_svg(
    view_pve_c: tuple[float, float],
    view_pve_d: tuple[float, float],
    rho: np.ndarray,
) -> str:
    """Bar chart of view-level PVEs plus a scree line of the canonical
    correlations; returns the SVG text."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        '<style>text{font-family:sans-serif;font-size:12px;}</style>',
    ]

    # Left panel: grouped PVE bars (common vs distinctive per view).
    parts.append(
        f'<text x="{_LEFT1}" y="{_TOP - 20}" font-weight="bold">'
        "View-level variance explained</text>"
    )
    base_y = _TOP + _PANEL_H
    bar_w = 40
    for i, (pc, pd) in enumerate(zip(view_pve_c, view_pve_d)):
        x0 = _LEFT1 + 30 + i * 120
        for j, (value, kind) in enumerate(((pc, "common"), (pd, "distinctive"))):
            height = max(0.0, min(1.0, value)) * _PANEL_H
            x = x0 + j * (bar_w + 6)
            parts.append(
                f'<rect x="{x}" y="{_fmt(base_y - height)}" width="{bar_w}" '
                f'height="{_fmt(height)}" fill="{_BAR_COLORS[kind]}"/>'
            )
            parts.append(
                f'<text x="{x + 2}" y="{_fmt(base_y - height - 4)}">'
                f"{_fmt(value)}</text>"
            )
        parts.append(
            f'<text x="{x0 + 18}" y="{base_y + 16}">view {i + 1}</text>'
        )
    parts.append(
        f'<line x1="{_LEFT1}" y1="{base_y}" x2="{_LEFT1 + _PANEL_W}" '
        f'y2="{base_y}" stroke="black"/>'
    )
    legend_y = _TOP
    for j, kind in enumerate(("common", "distinctive")):
        parts.append(
            f'<rect x="{_LEFT1 + _PANEL_W - 96}" y="{legend_y + j * 18}" '
            f'width="12" height="12" fill="{_BAR_COLORS[kind]}"/>'
        )
        parts.append(
            f'<text x="{_LEFT1 + _PANEL_W - 80}" y="{legend_y + j * 18 + 10}">'
            f"{kind}</text>"
        )

    # Right panel: canonical correlation scree line.
    parts.append(
        f'<text x="{_LEFT2}" y="{_TOP - 20}" font-weight="bold">'
        "Canonical correlations</text>"
    )
    parts.append(
        f'<line x1="{_LEFT2}" y1="{base_y}" x2="{_LEFT2 + _PANEL_W}" '
        f'y2="{base_y}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_LEFT2}" y1="{base_y}" x2="{_LEFT2}" y2="{_TOP}" '
        'stroke="black"/>'
    )
    rho = np.asarray(rho, dtype=float)
    if rho.size:
        step = _PANEL_W / max(rho.size, 2)
        points = []
        for i, value in enumerate(rho):
            x = _LEFT2 + (i + 0.5) * step
            y = base_y - max(0.0, min(1.0, value)) * _PANEL_H
            points.append(f"{_fmt(x)},{_fmt(y)}")
            parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="#303030"/>'
            )
            parts.append(
                f'<text x="{_fmt(x - 8)}" y="{base_y + 16}">{i + 1}</text>'
            )
        if len(points) > 1:
            parts.append(
                f'<polyline points="{" ".join(points)}" fill="none" '
                'stroke="#303030" stroke-width="1.5"/>'
            )
    else:
        parts.append(
            f'<text x="{_LEFT2 + 60}" y="{_TOP + _PANEL_H // 2}">'
            "no shared factors</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_pve_summary(path, view_pve_c, view_pve_d, rho) -> None:
    Path(path).write_text(pve_summary_svg(view_pve_c, view_pve_d, rho))
