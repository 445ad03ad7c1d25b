"""Deterministic SVG rendering of a pipeline report.

One self-contained document shows the ground-plane scene: detected
individuals as dots, cluster hulls, safety-offset loops, straight tour
legs with arrowheads, the depot, and per-cluster risk labels.  Arcs are
linearized at a five-degree step before drawing.  All coordinates are
written with fixed precision and every collection is emitted in a fixed
order, so the same report always produces the same bytes.
"""

from __future__ import annotations

import math

from .inspection import Point
from .pipeline import PipelineReport

CANVAS_WIDTH = 800.0
MARGIN = 60.0
ARC_STEP = math.radians(5.0)
MIN_SPAN = 20.0  # meters; keeps the scale bar on-canvas for tiny scenes

_STYLE = """\
  .person { fill: #1f6feb; }
  .outlier { fill: #9aa0a6; }
  .depot { fill: #d29922; stroke: #6e5200; stroke-width: 1; }
  .hull { fill: none; stroke: #d0d7de; stroke-width: 1; stroke-dasharray: 4 3; }
  .loop { fill: none; stroke: #2da44e; stroke-width: 1.5; }
  .tour-leg { stroke: #cf222e; stroke-width: 1.5; }
  .risk { font: 11px sans-serif; fill: #24292f; }
  .legend { font: 11px sans-serif; fill: #24292f; }
  .frame { fill: none; stroke: #24292f; stroke-width: 1; }
  .scalebar { stroke: #24292f; stroke-width: 2; }
"""


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


class _Projection:
    """Ground meters to SVG pixels; flips y so north is up on screen."""

    def __init__(self, points: list[Point]):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        self.min_x, self.max_x = min(xs), max(xs)
        self.min_y, self.max_y = min(ys), max(ys)
        span = max(self.max_x - self.min_x, self.max_y - self.min_y, MIN_SPAN)
        self.scale = (CANVAS_WIDTH - 2.0 * MARGIN) / span
        self.width = CANVAS_WIDTH
        self.height = (self.max_y - self.min_y) * self.scale + 2.0 * MARGIN

    def to_svg(self, point: Point) -> tuple[float, float]:
        x = (point[0] - self.min_x) * self.scale + MARGIN
        y = (self.max_y - point[1]) * self.scale + MARGIN
        return x, y


def _scene_points(report: PipelineReport) -> list[Point]:
    points: list[Point] = [tuple(report.config.depot)]
    points.extend(p.xy() for p in report.ground_points)
    for path in report.inspection_paths.values():
        points.extend(path.polyline(ARC_STEP))
    return points


def _polyline_attr(points: list[tuple[float, float]]) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)


def render_svg(report: PipelineReport) -> str:
    """Render one report to an SVG document string."""
    projection = _Projection(_scene_points(report))
    body: list[str] = []

    # Cluster hulls under everything else.
    for cluster_id in sorted(report.hulls):
        hull = report.hulls[cluster_id]
        if hull.n_vertices >= 2:
            pts = [projection.to_svg(v) for v in hull.vertices]
            body.append(f'<polygon class="hull" points="{_polyline_attr(pts)}" />')

    for cluster_id in sorted(report.inspection_paths):
        path = report.inspection_paths[cluster_id]
        pts = [projection.to_svg(p) for p in path.polyline(ARC_STEP)]
        body.append(f'<polygon class="loop" points="{_polyline_attr(pts)}" />')

    if report.trajectory is not None:
        for leg in report.trajectory.legs:
            x1, y1 = projection.to_svg(leg.start)
            x2, y2 = projection.to_svg(leg.end)
            body.append(f'<line class="tour-leg" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                        f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" marker-end="url(#arrow)" />')

    outliers = set(report.outlier_indices)
    for index, point in enumerate(report.ground_points):
        x, y = projection.to_svg(point.xy())
        css = "outlier" if index in outliers else "person"
        body.append(f'<circle class="{css}" cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" />')

    for cluster in report.clusters:
        x, y = projection.to_svg(cluster.barycenter)
        body.append(f'<text class="risk" x="{_fmt(x + 6.0)}" y="{_fmt(y - 6.0)}">'
                    f'#{cluster.id} &#955;={cluster.risk:.2f}</text>')

    dx, dy = projection.to_svg(tuple(report.config.depot))
    body.append(f'<rect class="depot" x="{_fmt(dx - 5.0)}" y="{_fmt(dy - 5.0)}" '
                'width="10" height="10" />')

    body.append(f'<rect class="frame" x="{_fmt(MARGIN / 2.0)}" y="{_fmt(MARGIN / 2.0)}" '
                f'width="{_fmt(projection.width - MARGIN)}" '
                f'height="{_fmt(projection.height - MARGIN)}" />')

    bar_meters = 10.0
    bar_px = bar_meters * projection.scale
    bar_y = projection.height - MARGIN / 4.0
    body.append(f'<line class="scalebar" x1="{_fmt(MARGIN)}" y1="{_fmt(bar_y)}" '
                f'x2="{_fmt(MARGIN + bar_px)}" y2="{_fmt(bar_y)}" />')
    body.append(f'<text class="legend" x="{_fmt(MARGIN + bar_px + 6.0)}" '
                f'y="{_fmt(bar_y + 4.0)}">{bar_meters:.0f} m</text>')

    legend = [
        ("person", "individual"),
        ("outlier", "outlier"),
        ("loop", "inspection loop"),
        ("tour-leg", "tour leg"),
        ("depot", "depot"),
    ]
    for i, (css, label) in enumerate(legend):
        y = MARGIN / 2.0 + 16.0 + 14.0 * i
        x = projection.width - MARGIN * 2.5
        if css in ("loop", "tour-leg"):
            body.append(f'<line class="{css}" x1="{_fmt(x - 16.0)}" y1="{_fmt(y - 4.0)}" '
                        f'x2="{_fmt(x - 4.0)}" y2="{_fmt(y - 4.0)}" />')
        elif css == "depot":
            body.append(f'<rect class="depot" x="{_fmt(x - 14.0)}" y="{_fmt(y - 8.0)}" '
                        'width="8" height="8" />')
        else:
            body.append(f'<circle class="{css}" cx="{_fmt(x - 10.0)}" cy="{_fmt(y - 4.0)}" r="3" />')
        body.append(f'<text class="legend" x="{_fmt(x)}" y="{_fmt(y)}">{label}</text>')

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{_fmt(projection.width)}" height="{_fmt(projection.height)}" '
        f'viewBox="0 0 {_fmt(projection.width)} {_fmt(projection.height)}">',
        "<style>",
        _STYLE.rstrip("\n"),
        "</style>",
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#cf222e" /></marker>',
        "</defs>",
        *body,
        "</svg>",
    ]
    return "\n".join(lines) + "\n"
