"""Parsing and filtering of aerial-image annotation files.

Annotation files follow the VisDrone detection devkit convention: one object
per line, eight comma-separated fields
``left,top,width,height,score,category,truncation,occlusion`` with pixel
coordinates measured from the top-left image corner.  Ground-truth files use
score 0/1; detector output files carry a confidence in the score column.
"""

from __future__ import annotations

from dataclasses import dataclass

CATEGORY_IGNORED = 0
CATEGORY_PEDESTRIAN = 1
CATEGORY_PEOPLE = 2

#: Category codes merged into the single "human" class.
HUMAN_CATEGORIES = frozenset({CATEGORY_PEDESTRIAN, CATEGORY_PEOPLE})


@dataclass(frozen=True)
class RawAnnotation:
    """One annotation line, in raw image coordinates (y grows downward)."""

    bbox_left: int
    bbox_top: int
    bbox_width: int
    bbox_height: int
    score: float
    category: int
    truncation: int
    occlusion: int

    def center(self) -> tuple[float, float]:
        """Box center as (column, row) in raw image coordinates."""
        return (self.bbox_left + self.bbox_width / 2.0,
                self.bbox_top + self.bbox_height / 2.0)

    def contains(self, point: tuple[float, float]) -> bool:
        """Point-in-rectangle test, boundary inclusive, raw coordinates."""
        cx, cy = point
        return (self.bbox_left <= cx <= self.bbox_left + self.bbox_width
                and self.bbox_top <= cy <= self.bbox_top + self.bbox_height)

    def to_line(self) -> str:
        score = int(self.score) if float(self.score).is_integer() else self.score
        return (f"{self.bbox_left},{self.bbox_top},{self.bbox_width},"
                f"{self.bbox_height},{score},{self.category},"
                f"{self.truncation},{self.occlusion}")


@dataclass(frozen=True)
class ImageFrame:
    """Parsed annotations of a single image plus any skipped-line reports."""

    width: int
    height: int
    annotations: tuple[RawAnnotation, ...]
    source_id: str = ""
    skipped: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class BoundingBox:
    """Detection rectangle with the y axis pointing up.

    ``y_top`` is the box's upper edge in the upward-positive convention, so
    the ground-contact line is ``y_top - h``.
    """

    x_left: float
    y_top: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box dimensions must be positive, got w={self.w}, h={self.h}")


def _parse_line(line: str, frame_width: int, frame_height: int) -> RawAnnotation:
    # Devkit files frequently end lines with a stray comma.
    fields = line.strip().rstrip(",").split(",")
    if len(fields) < 8:
        raise ValueError(f"expected at least 8 fields, got {len(fields)}")

    left, top, w, h = (int(fields[i]) for i in range(4))
    score = float(fields[4])
    category, truncation, occlusion = (int(fields[i]) for i in range(5, 8))

    if w <= 0 or h <= 0:
        raise ValueError(f"non-positive box size {w}x{h}")
    if left < 0 or top < 0:
        raise ValueError(f"negative box origin ({left},{top})")
    if left >= frame_width or top >= frame_height:
        raise ValueError("box lies outside the frame")

    # Clamp overhang at the right/bottom edges into the frame.
    w = min(w, frame_width - left)
    h = min(h, frame_height - top)
    return RawAnnotation(left, top, w, h, score, category, truncation, occlusion)


def parse_annotations(text: str, frame_width: int, frame_height: int,
                      source_id: str = "") -> ImageFrame:
    """Parse one annotation file into an :class:`ImageFrame`.

    Malformed lines do not abort parsing; they are collected in
    ``ImageFrame.skipped`` as ``(line_number, reason)`` pairs.
    """
    if not isinstance(text, str):
        raise TypeError("annotation content must be a string")
    if frame_width <= 0 or frame_height <= 0:
        raise ValueError(f"frame dimensions must be positive, got {frame_width}x{frame_height}")

    annotations: list[RawAnnotation] = []
    skipped: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            annotations.append(_parse_line(line, frame_width, frame_height))
        except ValueError as exc:
            skipped.append((lineno, str(exc)))

    return ImageFrame(width=frame_width, height=frame_height,
                      annotations=tuple(annotations), source_id=source_id,
                      skipped=tuple(skipped))


def serialize_annotations(frame: ImageFrame) -> str:
    """Write the kept annotations back to the devkit line format."""
    return "\n".join(a.to_line() for a in frame.annotations)


def human_annotations(frame: ImageFrame) -> list[RawAnnotation]:
    """Human annotations (pedestrian and people merged) outside ignored regions.

    Annotations whose raw center falls inside any ignored-region annotation
    are dropped.
    """
    ignored = [a for a in frame.annotations if a.category == CATEGORY_IGNORED]
    return [ann for ann in frame.annotations
            if ann.category in HUMAN_CATEGORIES
            and not any(region.contains(ann.center()) for region in ignored)]


def filter_humans(frame: ImageFrame) -> list[BoundingBox]:
    """Human boxes converted to the upward-positive y convention."""
    return [to_bounding_box(ann, frame.height) for ann in human_annotations(frame)]


def to_bounding_box(ann: RawAnnotation, frame_height: int) -> BoundingBox:
    """Convert one raw annotation to the upward-positive box convention."""
    return BoundingBox(x_left=float(ann.bbox_left),
                       y_top=float(frame_height - ann.bbox_top),
                       w=float(ann.bbox_width),
                       h=float(ann.bbox_height))
