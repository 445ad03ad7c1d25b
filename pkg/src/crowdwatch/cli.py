"""Command-line interface for the crowd monitoring pipeline.

Subcommands cover the full run (``pipeline``), each stage on its own
(``map``, ``cluster``, ``plan``, ``inspect``), detection evaluation
(``deteval``), solver benchmarks (``bench``), and SVG rendering
(``render``).  Options can come from a flat JSON config file via
``--config``; explicit flags always win over the file.

Exit codes: 0 on success, 1 on runtime failure (I/O, solver errors),
2 on configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotations import (filter_humans, human_annotations, parse_annotations,
                          to_bounding_box)
from .bench import ARENA_SIDE, run_benchmark, write_csv
from .inspection import stitch_full_trajectory, trajectory_to_dict
from .metrics import ScoredBox, evaluate_detections
from .pipeline import (ConfigError, PipelineConfig, PipelineReport, run_pipeline)
from .planning import SOLVERS
from .render import render_svg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="flat JSON config file; explicit flags override it")
    parser.add_argument("--seed", type=int, help="seed for stochastic solvers")
    parser.add_argument("--output-dir", metavar="DIR", default=".",
                        help="directory for output artifacts (default: current)")


def _add_frame_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--annotations", metavar="FILE", required=True,
                        help="annotation file (left,top,width,height,score,category,...)")
    parser.add_argument("--width", type=int, help="frame width in pixels")
    parser.add_argument("--height", type=int, help="frame height in pixels")
    parser.add_argument("--metadata", metavar="FILE",
                        help="JSON file with {\"width\": ..., \"height\": ...}")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--focal-length-mm", type=float, metavar="MM",
                        help="camera focal length in millimeters")
    parser.add_argument("--pixel-size-um", type=float, metavar="UM",
                        help="sensor pixel size in micrometers")
    parser.add_argument("--assumed-height-m", type=float, metavar="M",
                        help="assumed standing height in meters")
    parser.add_argument("--eps", type=float, metavar="M",
                        help="clustering neighborhood radius in meters")
    parser.add_argument("--min-points", type=int, metavar="N",
                        help="minimum neighbors (self included) for a core point")
    parser.add_argument("--risk-distance", type=float, metavar="M",
                        help="distance threshold for violating pairs in meters")
    parser.add_argument("--alpha", type=float,
                        help="priority weight in [0, 1] for tour costs")
    parser.add_argument("--safety-distance", type=float, metavar="M",
                        help="inspection loop standoff distance in meters")
    parser.add_argument("--solver", choices=sorted(SOLVERS) + ["all"],
                        help="tour solver; 'all' runs every solver and keeps the best")
    parser.add_argument("--depot", type=float, nargs=2, metavar=("X", "Y"),
                        help="vehicle start position in ground meters")
    parser.add_argument("--exhaustive-cap", type=int, metavar="N",
                        help="largest node count allowed for exhaustive search")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()

    def scaled(value, factor):
        return None if value is None else value * factor

    return config.with_overrides(
        focal_length=scaled(getattr(args, "focal_length_mm", None), 1e-3),
        pixel_size=scaled(getattr(args, "pixel_size_um", None), 1e-6),
        assumed_height=getattr(args, "assumed_height_m", None),
        eps=getattr(args, "eps", None),
        min_points=getattr(args, "min_points", None),
        risk_distance=getattr(args, "risk_distance", None),
        alpha=getattr(args, "alpha", None),
        safety_distance=getattr(args, "safety_distance", None),
        solver=getattr(args, "solver", None),
        seed=args.seed,
        depot=tuple(args.depot) if getattr(args, "depot", None) else None,
        exhaustive_cap=getattr(args, "exhaustive_cap", None),
    )


def _frame_dims(args: argparse.Namespace) -> tuple[int, int]:
    if args.metadata:
        with open(args.metadata, "r", encoding="utf-8") as fh:
            try:
                meta = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"metadata file {args.metadata} is not valid JSON: {exc}")
        try:
            width, height = int(meta["width"]), int(meta["height"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"metadata file {args.metadata} must provide "
                              "integer 'width' and 'height'") from None
    elif args.width is not None and args.height is not None:
        width, height = args.width, args.height
    else:
        raise ConfigError("frame dimensions required: pass --width and --height, "
                          "or --metadata")
    if width <= 0 or height <= 0:
        raise ConfigError(f"frame dimensions must be positive, got {width}x{height}")
    return width, height


def _output_dir(args: argparse.Namespace) -> Path:
    path = Path(args.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_report(args: argparse.Namespace, stop_after: str) -> PipelineReport:
    config = _load_config(args)
    width, height = _frame_dims(args)
    text = Path(args.annotations).read_text(encoding="utf-8")
    return run_pipeline(text, width, height, config,
                        source_id=Path(args.annotations).stem, stop_after=stop_after)


def _print_timings(report: PipelineReport) -> None:
    parts = " ".join(f"{stage} {seconds:.3f}" for stage, seconds in report.timings.items())
    print(f"timings[s]: {parts}", file=sys.stderr)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _subset(report: PipelineReport, *keys: str) -> dict:
    full = report.to_dict()
    return {key: full[key] for key in keys}


def cmd_pipeline(args: argparse.Namespace) -> int:
    report = _run_report(args, "inspection")
    out = _output_dir(args) / "report.json"
    out.write_bytes(report.json_bytes())
    tour = report.tour
    tour_text = (f"{tour.solver.value} cost {tour.total_cost:.3f}"
                 if tour else "none")
    trajectory_text = (f"{report.trajectory.total_length:.1f} m"
                       if report.trajectory else "none")
    print(f"humans: {len(report.boxes)}  clusters: {len(report.clusters)}  "
          f"tour: {tour_text}  trajectory: {trajectory_text}")
    print(f"wrote {out}")
    _print_timings(report)
    return 0


def cmd_map(args: argparse.Namespace) -> int:
    report = _run_report(args, "mapping")
    out = _output_dir(args) / "ground.json"
    _write_json(out, _subset(report, "frame", "height_correction", "individuals"))
    print(f"humans: {len(report.boxes)}  "
          f"correction: {'applied' if report.correction_applied else 'skipped'}")
    print(f"wrote {out}")
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    report = _run_report(args, "clustering")
    out = _output_dir(args) / "clusters.json"
    _write_json(out, _subset(report, "frame", "clusters", "outliers"))
    print(f"humans: {len(report.boxes)}  clusters: {len(report.clusters)}  "
          f"outliers: {len(report.outlier_indices)}")
    print(f"wrote {out}")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    report = _run_report(args, "planning")
    out = _output_dir(args) / "tour.json"
    _write_json(out, _subset(report, "clusters", "tour"))
    if report.tour:
        order = " -> ".join(["0", *map(str, report.tour.order), "0"])
        print(f"tour ({report.tour.solver.value}): {order}  "
              f"cost {report.tour.total_cost:.3f}")
    else:
        print("no clusters, no tour")
    print(f"wrote {out}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    report = _run_report(args, "inspection")
    out = _output_dir(args) / "inspection.json"
    if report.trajectory is not None:
        payload = trajectory_to_dict(report.trajectory)
    else:
        payload = trajectory_to_dict(
            stitch_full_trajectory(report.config.depot, (), {}))
    _write_json(out, payload)
    if report.trajectory:
        print(f"loops: {len(report.inspection_paths)}  "
              f"transit: {report.trajectory.transit_length:.1f} m  "
              f"inspection: {report.trajectory.inspection_length:.1f} m")
    else:
        print("no clusters, nothing to inspect")
    print(f"wrote {out}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    report = _run_report(args, "inspection")
    out = _output_dir(args) / "scene.svg"
    out.write_text(render_svg(report), encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_deteval(args: argparse.Namespace) -> int:
    width, height = _frame_dims(args)
    pred_text = Path(args.predictions).read_text(encoding="utf-8")
    truth_text = Path(args.truth).read_text(encoding="utf-8")
    pred_frame = parse_annotations(pred_text, width, height,
                                   source_id=Path(args.predictions).stem)
    truth_frame = parse_annotations(truth_text, width, height,
                                    source_id=Path(args.truth).stem)
    preds = [ScoredBox(box=to_bounding_box(ann, height), score=ann.score)
             for ann in human_annotations(pred_frame)]
    truths = filter_humans(truth_frame)
    result = evaluate_detections(preds, truths, iou_threshold=args.iou_threshold)
    print(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    return 0


def _parse_sizes(text: str) -> list[int]:
    try:
        if "-" in text:
            low, high = text.split("-", maxsplit=1)
            sizes = list(range(int(low), int(high) + 1))
        else:
            sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse sizes {text!r}; "
                          "use 'LOW-HIGH' or a comma list") from None
    if not sizes or min(sizes) < 1:
        raise ConfigError(f"sizes must be positive, got {text!r}")
    return sizes


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = _parse_sizes(args.sizes)
    solvers = args.solvers.split(",") if args.solvers else list(SOLVERS)
    try:
        rows, notices = run_benchmark(sizes, args.instances, args.alpha,
                                      seed=args.seed if args.seed is not None else 0,
                                      solvers=solvers,
                                      exhaustive_cap=args.exhaustive_cap,
                                      arena=args.arena)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for notice in notices:
        print(notice, file=sys.stderr)
    out = _output_dir(args) / "bench.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        write_csv(rows, fh)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdwatch",
        description="Aerial crowd monitoring: detections to ground map, "
                    "social-distance clusters, inspection tour.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("pipeline", cmd_pipeline, "run all stages and write report.json"),
        ("map", cmd_map, "project detections to ground coordinates"),
        ("cluster", cmd_cluster, "ground-map detections and cluster them"),
        ("plan", cmd_plan, "plan the cluster visiting tour"),
        ("inspect", cmd_inspect, "plan tour plus safety-offset loops"),
        ("render", cmd_render, "run all stages and write scene.svg"),
    ]
    for name, handler, help_text in specs:
        sub = subparsers.add_parser(name, help=help_text)
        _add_common(sub)
        _add_frame_args(sub)
        _add_config_flags(sub)
        sub.set_defaults(func=handler)

    deteval = subparsers.add_parser(
        "deteval", help="evaluate a detection file against ground truth")
    _add_common(deteval)
    deteval.add_argument("--predictions", metavar="FILE", required=True,
                         help="detector output annotations with confidences")
    deteval.add_argument("--truth", metavar="FILE", required=True,
                         help="ground-truth annotations")
    deteval.add_argument("--width", type=int, help="frame width in pixels")
    deteval.add_argument("--height", type=int, help="frame height in pixels")
    deteval.add_argument("--metadata", metavar="FILE",
                         help="JSON file with {\"width\": ..., \"height\": ...}")
    deteval.add_argument("--iou-threshold", type=float, default=0.5,
                         help="match threshold (default 0.5)")
    deteval.set_defaults(func=cmd_deteval)

    bench = subparsers.add_parser(
        "bench", help="benchmark the tour solvers on random instances")
    _add_common(bench)
    bench.add_argument("--sizes", default="4-9",
                       help="cluster counts, 'LOW-HIGH' or comma list (default 4-9)")
    bench.add_argument("--instances", type=int, default=60,
                       help="number of random instances (default 60)")
    bench.add_argument("--alpha", type=float, default=0.99,
                       help="priority weight (default 0.99)")
    bench.add_argument("--solvers", metavar="LIST",
                       help="comma list of solvers (default: all four)")
    bench.add_argument("--exhaustive-cap", type=int, default=11, metavar="N",
                       help="largest node count for exhaustive search (default 11)")
    bench.add_argument("--arena", type=float, default=ARENA_SIDE, metavar="M",
                       help="arena side length in meters (default 100)")
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
