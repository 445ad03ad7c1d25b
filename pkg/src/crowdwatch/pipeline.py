"""End-to-end run: annotations -> ground map -> clusters -> tour -> loops.

The pipeline wires the stage modules together behind one validated
config.  Config files are flat JSON whose keys mirror the CLI flags;
focal length and pixel size are given in millimeters and micrometers
there (matching how camera specs are usually quoted) and converted to
meters internally.  Stage timings are collected but kept out of the
canonical report JSON so identical inputs and seed produce identical
bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from time import perf_counter
from typing import Mapping, Sequence

import numpy as np

from .annotations import BoundingBox, ImageFrame, filter_humans, parse_annotations
from .clustering import Cluster, ClusterParams, build_clusters
from .inspection import (ConvexHull, FullTrajectory, InspectionPath, convex_hull,
                         offset_path, stitch_full_trajectory, trajectory_to_dict)
from .mapping import (Anchor, CameraIntrinsics, CorrectionUnavailable, GroundPoint,
                      QuadraticHeightModel, box_anchor, correct_heights,
                      fit_height_model, map_all_to_ground, uncorrected)
from .planning import (DEFAULT_EXHAUSTIVE_CAP, SOLVERS, ClusterGraph, Tour,
                       build_graph, make_solver)


class ConfigError(ValueError):
    """Invalid configuration; callers map this to the usage exit code."""


#: Solver evaluation order for ``solver = "all"``; ties go to the earliest.
SOLVER_ORDER = tuple(SOLVERS)


@dataclass(frozen=True)
class PipelineConfig:
    """All tunables for one pipeline run, validated on construction."""

    focal_length: float = 0.010
    pixel_size: float = 18e-6
    assumed_height: float = 1.75
    eps: float = 2.0
    min_points: int = 3
    risk_distance: float = 2.0
    alpha: float = 0.99
    safety_distance: float = 2.0
    solver: str = "two-opt"
    seed: int = 0
    depot: tuple[float, float] = (0.0, 0.0)
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP

    def __post_init__(self):
        try:
            self.camera()
            self.cluster_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.safety_distance <= 0.0:
            raise ConfigError(f"safety_distance must be positive, got {self.safety_distance}")
        if self.solver != "all" and self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; "
                              f"choose from {sorted(SOLVERS)} or 'all'")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if len(self.depot) != 2 or not all(math.isfinite(v) for v in self.depot):
            raise ConfigError(f"depot must be two finite coordinates, got {self.depot!r}")
        if self.exhaustive_cap < 2:
            raise ConfigError(f"exhaustive_cap must be at least 2, got {self.exhaustive_cap}")

    def camera(self) -> CameraIntrinsics:
        return CameraIntrinsics(focal_length=self.focal_length,
                                pixel_size=self.pixel_size,
                                assumed_height=self.assumed_height)

    def cluster_params(self) -> ClusterParams:
        return ClusterParams(eps=self.eps, min_points=self.min_points,
                             risk_distance=self.risk_distance)

    @classmethod
    def from_mapping(cls, data: Mapping) -> "PipelineConfig":
        """Build from flat JSON keys; unknown keys are rejected."""
        converters = {
            "focal_length_mm": ("focal_length", lambda v: float(v) * 1e-3),
            "pixel_size_um": ("pixel_size", lambda v: float(v) * 1e-6),
            "assumed_height_m": ("assumed_height", float),
            "eps": ("eps", float),
            "min_points": ("min_points", int),
            "risk_distance": ("risk_distance", float),
            "alpha": ("alpha", float),
            "safety_distance": ("safety_distance", float),
            "solver": ("solver", str),
            "seed": ("seed", int),
            "depot": ("depot", lambda v: (float(v[0]), float(v[1]))),
            "exhaustive_cap": ("exhaustive_cap", int),
        }
        unknown = sorted(set(data) - set(converters))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in data.items():
            name, convert = converters[key]
            try:
                kwargs[name] = convert(value)
            except (TypeError, ValueError, IndexError):
                raise ConfigError(f"config key {key!r} has invalid value {value!r}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")
        return cls.from_mapping(data)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """New config with the given non-None fields replaced."""
        changes = {}
        for name, value in overrides.items():
            if value is None:
                continue
            if name not in {f.name for f in dataclasses.fields(self)}:
                raise ConfigError(f"unknown config field {name!r}")
            changes[name] = value
        return dataclasses.replace(self, **changes) if changes else self

    def to_dict(self) -> dict:
        return {
            "focal_length": self.focal_length,
            "pixel_size": self.pixel_size,
            "assumed_height": self.assumed_height,
            "eps": self.eps,
            "min_points": self.min_points,
            "risk_distance": self.risk_distance,
            "alpha": self.alpha,
            "safety_distance": self.safety_distance,
            "solver": self.solver,
            "seed": self.seed,
            "depot": list(self.depot),
            "exhaustive_cap": self.exhaustive_cap,
        }


def _solver_seed(base_seed: int, solver_index: int) -> int:
    return int(np.random.SeedSequence([base_seed, solver_index]).generate_state(1)[0])


@dataclass
class PipelineReport:
    """Every stage output of one run, plus wall-clock timings."""

    config: PipelineConfig
    frame: ImageFrame
    boxes: list[BoundingBox]
    correction_applied: bool
    height_model: QuadraticHeightModel | None
    anchors: list[Anchor]
    ground_points: list[GroundPoint]
    clusters: list[Cluster]
    outlier_indices: list[int]
    graph: ClusterGraph | None
    tour: Tour | None
    candidate_tours: dict[str, Tour]
    hulls: dict[int, ConvexHull]
    inspection_paths: dict[int, InspectionPath]
    trajectory: FullTrajectory | None
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        clusters = []
        for cluster in self.clusters:
            hull = self.hulls.get(cluster.id)
            path = self.inspection_paths.get(cluster.id)
            clusters.append({
                "id": cluster.id,
                "size": cluster.size,
                "risk": cluster.risk,
                "barycenter": list(cluster.barycenter),
                "member_indices": list(cluster.member_indices),
                "hull": [list(v) for v in hull.vertices] if hull else None,
                "loop_length": path.length if path else None,
            })

        tour = None
        if self.tour is not None:
            tour = {
                "solver": self.tour.solver.value,
                "order": list(self.tour.order),
                "total_cost": self.tour.total_cost,
            }
            if self.candidate_tours:
                tour["candidates"] = {
                    name: {"order": list(t.order), "total_cost": t.total_cost}
                    for name, t in sorted(self.candidate_tours.items())
                }

        trajectory = (trajectory_to_dict(self.trajectory)
                      if self.trajectory is not None else None)

        report = {
            "config": self.config.to_dict(),
            "frame": {
                "source_id": self.frame.source_id,
                "width": self.frame.width,
                "height": self.frame.height,
                "n_annotations": len(self.frame.annotations),
                "n_skipped": len(self.frame.skipped),
                "skipped": [[lineno, reason] for lineno, reason in self.frame.skipped],
                "n_humans": len(self.boxes),
            },
            "height_correction": {
                "applied": self.correction_applied,
                "coefficients": (list(self.height_model.coefficients)
                                 if self.height_model else None),
                "n_flagged": sum(1 for a in self.anchors if a.flagged),
            },
            "individuals": [
                {
                    "x_center": anchor.x_center,
                    "y_bottom": anchor.y_bottom,
                    "h": anchor.h,
                    "h_c": anchor.h_c,
                    "flagged": anchor.flagged,
                    "ground": [point.x, point.y],
                }
                for anchor, point in zip(self.anchors, self.ground_points)
            ],
            "clusters": clusters,
            "outliers": list(self.outlier_indices),
            "tour": tour,
            "trajectory": trajectory,
        }
        if include_timings:
            report["timings"] = dict(self.timings)
        return report

    def json_bytes(self, include_timings: bool = False) -> bytes:
        text = json.dumps(self.to_dict(include_timings), sort_keys=True, indent=2)
        return (text + "\n").encode("utf-8")


def _plan(graph: ClusterGraph, config: PipelineConfig) -> tuple[Tour, dict[str, Tour]]:
    names: Sequence[str] = SOLVER_ORDER if config.solver == "all" else (config.solver,)
    candidates: dict[str, Tour] = {}
    for name in names:
        if name == "exhaustive" and graph.n_nodes > config.exhaustive_cap:
            if config.solver == "all":
                continue
            # Fall through so the solver raises its descriptive error.
        solver = make_solver(name, seed=_solver_seed(config.seed, SOLVER_ORDER.index(name)),
                             exhaustive_cap=config.exhaustive_cap)
        candidates[name] = solver.solve(graph)
    best_name = min(candidates,
                    key=lambda n: (candidates[n].total_cost, SOLVER_ORDER.index(n)))
    return candidates[best_name], (candidates if config.solver == "all" else {})


STAGES = ("ingest", "mapping", "clustering", "planning", "inspection")


def run_pipeline(text: str, frame_width: int, frame_height: int,
                 config: PipelineConfig, source_id: str = "",
                 stop_after: str = "inspection") -> PipelineReport:
    """Run the stages on one annotation file's worth of detections.

    Stages short-circuit on empty input: no detected humans means no
    clusters, no tour, and no trajectory, but still a complete report.
    ``stop_after`` truncates the run after the named stage; later stages
    are left empty in the report.
    """
    if stop_after not in STAGES:
        raise ValueError(f"stop_after must be one of {STAGES}, got {stop_after!r}")
    last = STAGES.index(stop_after)
    timings: dict[str, float] = {}
    total_start = perf_counter()

    stage_start = perf_counter()
    frame = parse_annotations(text, frame_width, frame_height, source_id=source_id)
    boxes = filter_humans(frame)
    timings["ingest"] = perf_counter() - stage_start

    anchors: list[Anchor] = []
    ground_points: list[GroundPoint] = []
    height_model: QuadraticHeightModel | None = None
    correction_applied = False
    if last >= STAGES.index("mapping"):
        stage_start = perf_counter()
        raw_anchors = [box_anchor(box) for box in boxes]
        if len(raw_anchors) >= 3:
            try:
                height_model = fit_height_model(raw_anchors)
                anchors = correct_heights(height_model, raw_anchors)
                correction_applied = True
            except CorrectionUnavailable:
                anchors = uncorrected(raw_anchors)
        else:
            anchors = uncorrected(raw_anchors)
        ground_points = map_all_to_ground(anchors, config.camera(), frame_width)
        timings["mapping"] = perf_counter() - stage_start

    clusters: list[Cluster] = []
    outliers: list[int] = []
    if last >= STAGES.index("clustering"):
        stage_start = perf_counter()
        clusters, outliers = build_clusters([p.xy() for p in ground_points],
                                            config.cluster_params())
        timings["clustering"] = perf_counter() - stage_start

    graph: ClusterGraph | None = None
    tour: Tour | None = None
    candidate_tours: dict[str, Tour] = {}
    if last >= STAGES.index("planning"):
        stage_start = perf_counter()
        if clusters:
            graph = build_graph(clusters, config.depot, config.alpha)
            tour, candidate_tours = _plan(graph, config)
        timings["planning"] = perf_counter() - stage_start

    hulls: dict[int, ConvexHull] = {}
    paths: dict[int, InspectionPath] = {}
    trajectory: FullTrajectory | None = None
    if last >= STAGES.index("inspection"):
        stage_start = perf_counter()
        if tour is not None:
            for cluster in clusters:
                hull = convex_hull(cluster.members)
                hulls[cluster.id] = hull
                paths[cluster.id] = offset_path(hull, config.safety_distance,
                                                cluster_id=cluster.id)
            trajectory = stitch_full_trajectory(config.depot, tour.order, paths)
        timings["inspection"] = perf_counter() - stage_start

    timings["total"] = perf_counter() - total_start
    return PipelineReport(config=config, frame=frame, boxes=boxes,
                          correction_applied=correction_applied,
                          height_model=height_model, anchors=anchors,
                          ground_points=ground_points, clusters=clusters,
                          outlier_indices=outliers, graph=graph, tour=tour,
                          candidate_tours=candidate_tours, hulls=hulls,
                          inspection_paths=paths, trajectory=trajectory,
                          timings=timings)
