"""Aerial crowd monitoring: detections to ground map, clusters, and tours.

The package turns per-frame human detections from a camera looking along
the ground plane into metric ground positions, groups social-distance
violations into risk-scored clusters, plans a priority-aware visiting
tour from a depot, and wraps each cluster in a safety-offset inspection
loop.  Detection-quality metrics and a solver benchmark harness round
out the toolkit; the ``crowdwatch`` CLI drives everything end to end.
"""

from .annotations import (BoundingBox, ImageFrame, RawAnnotation, filter_humans,
                          human_annotations, parse_annotations,
                          serialize_annotations, to_bounding_box)
from .bench import BenchRow, random_instance, run_benchmark, write_csv
from .clustering import (OUTLIER_LABEL, Cluster, ClusterParams,
                         SocialDistanceClusterer, barycenter, build_clusters,
                         dbscan, risk_score)
from .inspection import (Arc, ConvexHull, FullTrajectory, InspectionPath, Segment,
                         TransitLeg, convex_hull, offset_path,
                         stitch_full_trajectory)
from .mapping import (Anchor, CameraIntrinsics, CorrectionUnavailable,
                      GroundPoint, GroundProjector, HeightCorrector,
                      QuadraticHeightModel, box_anchor, correct_heights,
                      fit_height_model, map_all_to_ground, map_to_ground,
                      uncorrected)
from .metrics import (DetectionReport, MatchCounts, PRPoint, ScoredBox,
                      average_precision, evaluate_detections, iou,
                      match_detections, matched_pairs, precision_recall_curve)
from .pipeline import ConfigError, PipelineConfig, PipelineReport, run_pipeline
from .planning import (AntColonySolver, ClusterGraph, ExhaustiveSolver,
                       GeneticSolver, SolverKind, Tour, TourSolver, TwoOptSolver,
                       build_graph, is_valid_order, make_solver, tour_cost)
from .render import render_svg

__version__ = "0.1.0"

__all__ = [
    "Anchor", "AntColonySolver", "Arc", "BenchRow", "BoundingBox",
    "CameraIntrinsics", "Cluster", "ClusterGraph", "ClusterParams",
    "ConfigError", "ConvexHull", "CorrectionUnavailable", "DetectionReport",
    "ExhaustiveSolver", "FullTrajectory", "GeneticSolver", "GroundPoint",
    "GroundProjector", "HeightCorrector", "ImageFrame", "InspectionPath",
    "MatchCounts", "OUTLIER_LABEL", "PRPoint", "PipelineConfig",
    "PipelineReport", "QuadraticHeightModel", "RawAnnotation", "ScoredBox",
    "Segment", "SocialDistanceClusterer", "SolverKind", "Tour", "TourSolver",
    "TransitLeg", "TwoOptSolver", "average_precision", "barycenter",
    "box_anchor", "build_clusters", "build_graph", "convex_hull",
    "correct_heights", "dbscan", "evaluate_detections", "filter_humans",
    "fit_height_model", "human_annotations", "iou", "is_valid_order",
    "make_solver", "map_all_to_ground", "map_to_ground", "match_detections",
    "matched_pairs", "offset_path", "parse_annotations",
    "precision_recall_curve", "random_instance", "render_svg", "risk_score",
    "run_benchmark", "run_pipeline", "serialize_annotations",
    "stitch_full_trajectory", "to_bounding_box", "tour_cost", "uncorrected",
    "write_csv",
]
