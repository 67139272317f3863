"""Deterministic JSON, CSV and SVG emission (12 significant digits)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DIGITS = 12
CSV_HEADER = "alpha,i_alpha,gamma_opt,wx,wy,wz"


def fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, f".{DIGITS}g")


def rounded(x: float):
    x = float(x)
    if not math.isfinite(x):
        return "+inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(fmt(x))


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return rounded(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    i_alpha: float
    gamma_opt: float
    worst_state: tuple

    def row(self) -> str:
        return ",".join(fmt(x) for x in (self.alpha, self.i_alpha, self.gamma_opt, *self.worst_state))


def curve_csv(points) -> str:
    return "\n".join([CSV_HEADER, *(p.row() for p in points)]) + "\n"


def curve_svg(points, width: int = 640, height: int = 360, margin: int = 48) -> str:
    """Self-contained polyline plot of I(alpha) against alpha."""
    xs = np.array([p.alpha for p in points])
    ys = np.array([p.i_alpha for p in points])
    y_top = max(float(ys.max()), 1e-12) * 1.1
    sx = (width - 2 * margin) / math.pi
    sy = (height - 2 * margin) / y_top

    def px(x, y):
        return margin + x * sx, height - margin - y * sy

    poly = " ".join("{:.2f},{:.2f}".format(*px(x, y)) for x, y in zip(xs, ys))
    x0, y0 = px(0.0, 0.0)
    x1, _ = px(math.pi, 0.0)
    _, y1 = px(0.0, y_top)
    ticks = []
    for frac, label in ((0.0, "0"), (0.5, "π/2"), (1.0, "π")):
        tx, _ = px(frac * math.pi, 0.0)
        ticks.append(f'<text x="{tx:.2f}" y="{y0 + 18:.2f}" text-anchor="middle" font-size="12">{label}</text>')
    for val in np.linspace(0.0, y_top / 1.1, 3):
        _, ty = px(0.0, val)
        ticks.append(f'<text x="{x0 - 6:.2f}" y="{ty + 4:.2f}" text-anchor="end" font-size="12">{val:.3f}</text>')
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
            '<rect width="100%" height="100%" fill="white"/>',
            f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y0:.2f}" stroke="black"/>',
            f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x0:.2f}" y2="{y1:.2f}" stroke="black"/>',
            *ticks,
            f'<text x="{(x0 + x1) / 2:.2f}" y="{height - 8}" text-anchor="middle" font-size="13">α</text>',
            f'<text x="14" y="{(y0 + y1) / 2:.2f}" font-size="13" transform="rotate(-90 14 {(y0 + y1) / 2:.2f})" text-anchor="middle">I(α) [bits]</text>',
            f'<polyline fill="none" stroke="#1f77b4" stroke-width="2" points="{poly}"/>',
            "</svg>",
            "",
        ]
    )
