"""Safety-offset inspection loops around cluster footprints.

Each cluster's members span a convex hull (gift wrapping, clockwise
vertex order).  The inspection path keeps a standoff distance from that
hull: every edge is translated outward along its normal, away from the
hull barycenter, and consecutive translated edges are joined by circular
arcs of standoff radius centered on the hull vertices.  The arcs sweep
clockwise, matching the edge traversal, so the closed loop's length is
exactly the hull perimeter plus the full-circle contribution
``2 * pi * standoff``.

Degenerate footprints still produce a closed loop: a single point maps
to a circle, two points (or any collinear set) to a stadium of two
parallel segments capped by semicircles.

A full mission trajectory chains the loops in tour order with straight
transit legs, entering each loop at its point nearest to the vehicle's
current position and leaving from that same point after a complete lap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

Point = tuple[float, float]

TWO_PI = 2.0 * math.pi


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _cross(o: Point, a: Point, b: Point) -> float:
    """Cross product of vectors o->a and o->b; negative when b is right of o->a."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _nearest_on_segment(a: Point, b: Point, p: Point) -> tuple[Point, float]:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return a, _dist(a, p)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / dd
    t = min(1.0, max(0.0, t))
    q = (ax + t * dx, ay + t * dy)
    return q, _dist(q, p)


@dataclass(frozen=True)
class ConvexHull:
    """Hull vertices in clockwise order, collinear points removed."""

    vertices: tuple[Point, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def perimeter(self) -> float:
        """Closed-walk length; a two-vertex hull counts its edge twice."""
        v = self.vertices
        if len(v) < 2:
            return 0.0
        if len(v) == 2:
            return 2.0 * _dist(v[0], v[1])
        return sum(_dist(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    @property
    def barycenter(self) -> Point:
        v = self.vertices
        return (sum(p[0] for p in v) / len(v), sum(p[1] for p in v) / len(v))

    def contains(self, point: Point, tol: float = 1e-9) -> bool:
        v = self.vertices
        if len(v) == 1:
            return _dist(v[0], point) <= tol
        if len(v) == 2:
            return _nearest_on_segment(v[0], v[1], point)[1] <= tol
        # Clockwise order: interior points sit on the right of every edge.
        for i in range(len(v)):
            if _cross(v[i], v[(i + 1) % len(v)], point) > tol:
                return False
        return True

    def distance_to(self, point: Point) -> float:
        """Distance from a point to the filled hull (0 inside)."""
        v = self.vertices
        if len(v) == 1:
            return _dist(v[0], point)
        if len(v) == 2:
            return _nearest_on_segment(v[0], v[1], point)[1]
        if self.contains(point, tol=0.0):
            return 0.0
        return min(_nearest_on_segment(v[i], v[(i + 1) % len(v)], point)[1]
                   for i in range(len(v)))


def convex_hull(points: Sequence[Point]) -> ConvexHull:
    """Gift-wrapping hull in clockwise order.

    Duplicate points are merged first.  Collinear candidates are resolved
    toward the farthest point, so no hull edge passes through an
    intermediate vertex.  One- and two-point inputs (and fully collinear
    sets) yield degenerate hulls with one or two vertices.
    """
    unique: list[Point] = []
    seen: set[Point] = set()
    for p in points:
        q = (float(p[0]), float(p[1]))
        if not (math.isfinite(q[0]) and math.isfinite(q[1])):
            raise ValueError(f"non-finite point {p!r}")
        if q not in seen:
            seen.add(q)
            unique.append(q)
    if not unique:
        raise ValueError("cannot build a hull from zero points")
    if len(unique) == 1:
        return ConvexHull(vertices=(unique[0],))

    start = min(unique)
    hull: list[Point] = [start]
    current = start
    while True:
        candidate = None
        for p in unique:
            if p == current:
                continue
            if candidate is None:
                candidate = p
                continue
            turn = _cross(current, candidate, p)
            if turn > 0.0 or (turn == 0.0 and _dist(current, p) > _dist(current, candidate)):
                candidate = p
        assert candidate is not None
        if candidate == start:
            break
        hull.append(candidate)
        current = candidate
    return ConvexHull(vertices=tuple(hull))


@dataclass(frozen=True)
class Segment:
    """Straight path element from start to end."""

    start: Point
    end: Point

    @property
    def length(self) -> float:
        return _dist(self.start, self.end)

    def nearest(self, point: Point) -> tuple[Point, float]:
        return _nearest_on_segment(self.start, self.end, point)

    def sample(self, max_spacing: float) -> list[Point]:
        """Evenly spaced points including both endpoints."""
        if max_spacing <= 0.0:
            raise ValueError("max_spacing must be positive")
        n = max(1, math.ceil(self.length / max_spacing))
        sx, sy = self.start
        ex, ey = self.end
        return [(sx + (ex - sx) * i / n, sy + (ey - sy) * i / n) for i in range(n + 1)]


@dataclass(frozen=True)
class Arc:
    """Circular path element; negative sweep runs clockwise."""

    center: Point
    radius: float
    start_angle: float
    sweep: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"arc radius must be positive, got {self.radius}")

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def end_angle(self) -> float:
        return self.start_angle + self.sweep

    def point_at(self, angle: float) -> Point:
        return (self.center[0] + self.radius * math.cos(angle),
                self.center[1] + self.radius * math.sin(angle))

    @property
    def start(self) -> Point:
        return self.point_at(self.start_angle)

    @property
    def end(self) -> Point:
        return self.point_at(self.end_angle)

    def _covers(self, angle: float) -> bool:
        if self.sweep >= 0.0:
            offset = (angle - self.start_angle) % TWO_PI
        else:
            offset = (self.start_angle - angle) % TWO_PI
        return offset <= abs(self.sweep) or abs(self.sweep) >= TWO_PI

    def nearest(self, point: Point) -> tuple[Point, float]:
        px, py = point[0] - self.center[0], point[1] - self.center[1]
        r = math.hypot(px, py)
        if r > 0.0:
            angle = math.atan2(py, px)
            if self._covers(angle):
                q = self.point_at(angle)
                return q, abs(r - self.radius)
        elif abs(self.sweep) >= TWO_PI:
            return self.start, self.radius
        a, da = self.start, _dist(self.start, point)
        b, db = self.end, _dist(self.end, point)
        return (a, da) if da <= db else (b, db)

    def sample(self, max_spacing: float) -> list[Point]:
        """Points at even angular steps whose arc spacing stays below the cap."""
        if max_spacing <= 0.0:
            raise ValueError("max_spacing must be positive")
        n = max(1, math.ceil(self.length / max_spacing))
        return [self.point_at(self.start_angle + self.sweep * i / n) for i in range(n + 1)]


PathElement = Segment | Arc


@dataclass(frozen=True)
class InspectionPath:
    """Closed standoff loop around one cluster footprint."""

    cluster_id: int
    standoff: float
    elements: tuple[PathElement, ...]

    @property
    def length(self) -> float:
        return sum(e.length for e in self.elements)

    @property
    def start(self) -> Point:
        return self.elements[0].start

    def nearest(self, point: Point) -> tuple[Point, float]:
        best: tuple[Point, float] | None = None
        for element in self.elements:
            q, d = element.nearest(point)
            if best is None or d < best[1]:
                best = (q, d)
        assert best is not None
        return best

    def sample_points(self, max_spacing: float) -> list[Point]:
        points: list[Point] = []
        for element in self.elements:
            points.extend(element.sample(max_spacing))
        return points

    def polyline(self, max_angle: float = math.radians(5.0)) -> list[Point]:
        """Linearized closed loop; arcs are split at the given angular step."""
        points: list[Point] = []
        for element in self.elements:
            if isinstance(element, Arc):
                n = max(1, math.ceil(abs(element.sweep) / max_angle))
                chunk = [element.point_at(element.start_angle + element.sweep * i / n)
                         for i in range(n + 1)]
            else:
                chunk = [element.start, element.end]
            if points and _dist(points[-1], chunk[0]) < 1e-12:
                chunk = chunk[1:]
            points.extend(chunk)
        return points


def _outward_normal(a: Point, b: Point, interior: Point) -> Point:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    nx, ny = -dy / length, dx / length
    mid = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
    # Flip toward the side away from the hull barycenter.
    if nx * (interior[0] - mid[0]) + ny * (interior[1] - mid[1]) > 0.0:
        nx, ny = -nx, -ny
    return nx, ny


def _clockwise_sweep(from_angle: float, to_angle: float) -> float:
    return -((from_angle - to_angle) % TWO_PI)


def offset_path(hull: ConvexHull, standoff: float, cluster_id: int = 0) -> InspectionPath:
    """Closed loop at constant standoff distance around the hull.

    Vertices of the hull become clockwise arcs, edges become outward
    translated segments.  A single vertex yields a full circle, two
    vertices a stadium.
    """
    if standoff <= 0.0:
        raise ValueError(f"standoff must be positive, got {standoff}")
    v = hull.vertices

    if len(v) == 1:
        circle = Arc(center=v[0], radius=standoff, start_angle=0.0, sweep=-TWO_PI)
        return InspectionPath(cluster_id=cluster_id, standoff=standoff, elements=(circle,))

    if len(v) == 2:
        a, b = v
        dx, dy = b[0] - a[0], b[1] - a[1]
        length = math.hypot(dx, dy)
        nx, ny = -dy / length, dx / length
        top_angle = math.atan2(ny, nx)
        elements: tuple[PathElement, ...] = (
            Segment((a[0] + nx * standoff, a[1] + ny * standoff),
                    (b[0] + nx * standoff, b[1] + ny * standoff)),
            Arc(center=b, radius=standoff, start_angle=top_angle, sweep=-math.pi),
            Segment((b[0] - nx * standoff, b[1] - ny * standoff),
                    (a[0] - nx * standoff, a[1] - ny * standoff)),
            Arc(center=a, radius=standoff, start_angle=top_angle - math.pi, sweep=-math.pi),
        )
        return InspectionPath(cluster_id=cluster_id, standoff=standoff, elements=elements)

    interior = hull.barycenter
    normals = [_outward_normal(v[i], v[(i + 1) % len(v)], interior) for i in range(len(v))]
    parts: list[PathElement] = []
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        nx, ny = normals[i]
        parts.append(Segment((a[0] + nx * standoff, a[1] + ny * standoff),
                             (b[0] + nx * standoff, b[1] + ny * standoff)))
        mx, my = normals[(i + 1) % len(v)]
        sweep = _clockwise_sweep(math.atan2(ny, nx), math.atan2(my, mx))
        if sweep != 0.0:
            parts.append(Arc(center=b, radius=standoff,
                             start_angle=math.atan2(ny, nx), sweep=sweep))
    return InspectionPath(cluster_id=cluster_id, standoff=standoff, elements=tuple(parts))


@dataclass(frozen=True)
class TransitLeg:
    """Straight flight between loops (or depot and a loop)."""

    start: Point
    end: Point

    @property
    def length(self) -> float:
        return _dist(self.start, self.end)


@dataclass(frozen=True)
class ClusterVisit:
    """One full lap of a loop, entered and left at the same point."""

    cluster_id: int
    entry: Point
    path: InspectionPath


@dataclass(frozen=True)
class FullTrajectory:
    """Transit legs and inspection laps for a complete mission."""

    depot: Point
    legs: tuple[TransitLeg, ...]
    visits: tuple[ClusterVisit, ...]

    @property
    def transit_length(self) -> float:
        return sum(leg.length for leg in self.legs)

    @property
    def inspection_length(self) -> float:
        return sum(visit.path.length for visit in self.visits)

    @property
    def total_length(self) -> float:
        return self.transit_length + self.inspection_length


def stitch_full_trajectory(depot: Point, order: Sequence[int],
                           paths: Mapping[int, InspectionPath]) -> FullTrajectory:
    """Chain inspection loops in tour order with straight transit legs.

    Each loop is entered at its point nearest to the vehicle's current
    position; after a complete lap the vehicle continues from that entry
    point, finally returning to the depot.  An empty tour yields an empty
    trajectory of zero length.
    """
    home = (float(depot[0]), float(depot[1]))
    if not order:
        return FullTrajectory(depot=home, legs=(), visits=())
    legs: list[TransitLeg] = []
    visits: list[ClusterVisit] = []
    current = home
    for cluster_id in order:
        cluster_id = int(cluster_id)
        try:
            path = paths[cluster_id]
        except KeyError:
            raise ValueError(f"no inspection path for cluster {cluster_id}") from None
        entry, _ = path.nearest(current)
        legs.append(TransitLeg(start=current, end=entry))
        visits.append(ClusterVisit(cluster_id=cluster_id, entry=entry, path=path))
        current = entry
    legs.append(TransitLeg(start=current, end=home))
    return FullTrajectory(depot=home, legs=tuple(legs), visits=tuple(visits))


def element_to_dict(element: PathElement) -> dict:
    if isinstance(element, Arc):
        return {
            "type": "arc",
            "center": list(element.center),
            "radius_m": element.radius,
            "start_angle_rad": element.start_angle,
            "sweep_rad": element.sweep,
            "length_m": element.length,
        }
    return {
        "type": "segment",
        "start": list(element.start),
        "end": list(element.end),
        "length_m": element.length,
    }


def trajectory_to_dict(trajectory: FullTrajectory) -> dict:
    """Export schema: depot, tour order, transit legs, loops, total length."""
    return {
        "depot": list(trajectory.depot),
        "tour_order": [visit.cluster_id for visit in trajectory.visits],
        "legs": [{"from": list(leg.start), "to": list(leg.end), "length_m": leg.length}
                 for leg in trajectory.legs],
        "loops": [{
            "cluster_id": visit.cluster_id,
            "entry": list(visit.entry),
            "elements": [element_to_dict(e) for e in visit.path.elements],
            "length_m": visit.path.length,
        } for visit in trajectory.visits],
        "transit_length_m": trajectory.transit_length,
        "inspection_length_m": trajectory.inspection_length,
        "total_length_m": trajectory.total_length,
    }
