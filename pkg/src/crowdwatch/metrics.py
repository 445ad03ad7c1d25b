"""Detection-quality metrics: IoU, greedy matching, precision/recall, AP.

Predictions carry confidence scores; ground truths do not.  Matching is
greedy in descending confidence: each prediction takes the unmatched
truth of highest IoU at or above the threshold (0.5 by default), ties
resolved toward the lowest truth index, so results are deterministic.

The precision-recall curve accumulates true/false-positive flags in the
same confidence order, one point per prediction.  Average precision is
the exact area under the precision envelope (the running maximum of
precision from high recall down), summed over distinct recall values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .annotations import BoundingBox


@dataclass(frozen=True)
class ScoredBox:
    """A predicted box with its detection confidence."""

    box: BoundingBox
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class MatchCounts:
    """True positives, false positives, and false negatives."""

    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts cannot be negative")

    @property
    def precision(self) -> float:
        """Fraction of predictions that matched; 1 when nothing was predicted."""
        total = self.tp + self.fp
        return 1.0 if total == 0 else self.tp / total

    @property
    def recall(self) -> float:
        """Fraction of truths that were found; 0 when there were none."""
        total = self.tp + self.fn
        return 0.0 if total == 0 else self.tp / total


@dataclass(frozen=True)
class PRPoint:
    """One precision/recall sample at a confidence threshold."""

    precision: float
    recall: float
    threshold: float

    def __post_init__(self):
        if not 0.0 <= self.precision <= 1.0:
            raise ValueError(f"precision must lie in [0, 1], got {self.precision}")
        if not 0.0 <= self.recall <= 1.0:
            raise ValueError(f"recall must lie in [0, 1], got {self.recall}")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    overlap_w = min(a.x_left + a.w, b.x_left + b.w) - max(a.x_left, b.x_left)
    overlap_h = min(a.y_top, b.y_top) - max(a.y_top - a.h, b.y_top - b.h)
    if overlap_w <= 0.0 or overlap_h <= 0.0:
        return 0.0
    intersection = overlap_w * overlap_h
    union = a.w * a.h + b.w * b.h - intersection
    return intersection / union


def _confidence_order(preds: Sequence[ScoredBox]) -> list[int]:
    return sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))


def matched_pairs(preds: Sequence[ScoredBox], truths: Sequence[BoundingBox],
                  iou_threshold: float = 0.5) -> list[tuple[int, int, float]]:
    """Greedy (prediction index, truth index, IoU) matches.

    Predictions are processed in descending confidence; each claims the
    unmatched truth with the highest IoU at or above the threshold.  On an
    IoU tie the lowest truth index wins.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")
    taken = [False] * len(truths)
    pairs: list[tuple[int, int, float]] = []
    for i in _confidence_order(preds):
        best_j = -1
        best_iou = 0.0
        for j, truth in enumerate(truths):
            if taken[j]:
                continue
            value = iou(preds[i].box, truth)
            if value >= iou_threshold and value > best_iou:
                best_j, best_iou = j, value
        if best_j >= 0:
            taken[best_j] = True
            pairs.append((i, best_j, best_iou))
    return pairs


def match_detections(preds: Sequence[ScoredBox], truths: Sequence[BoundingBox],
                     iou_threshold: float = 0.5) -> MatchCounts:
    """Count matches between predictions and truths at one IoU threshold."""
    pairs = matched_pairs(preds, truths, iou_threshold)
    tp = len(pairs)
    return MatchCounts(tp=tp, fp=len(preds) - tp, fn=len(truths) - tp)


def precision_recall_curve(preds: Sequence[ScoredBox], truths: Sequence[BoundingBox],
                           iou_threshold: float = 0.5) -> list[PRPoint]:
    """One PR point per prediction, swept in descending confidence.

    Greedy matching in confidence order means the matches of the top-k
    predictions never depend on the rest, so the k-th point equals a full
    evaluation thresholded at the k-th score.
    """
    if not truths:
        raise ValueError("cannot sweep recall without ground-truth boxes")
    pairs = matched_pairs(preds, truths, iou_threshold)
    matched = {i for i, _, _ in pairs}
    points: list[PRPoint] = []
    tp = 0
    for k, i in enumerate(_confidence_order(preds), start=1):
        if i in matched:
            tp += 1
        points.append(PRPoint(precision=tp / k, recall=tp / len(truths),
                              threshold=preds[i].score))
    return points


def average_precision(points: Sequence[PRPoint]) -> float:
    """Exact area under the precision envelope over recall.

    The envelope at recall r is the maximum precision among points with
    recall at or above r; the area is summed over distinct recall values,
    so duplicated points cannot change the result.  An empty curve has
    zero area.
    """
    if not points:
        return 0.0
    recalls = sorted({p.recall for p in points})
    area = 0.0
    previous = 0.0
    for r in recalls:
        envelope = max(p.precision for p in points if p.recall >= r)
        area += (r - previous) * envelope
        previous = r
    return area


@dataclass(frozen=True)
class DetectionReport:
    """Aggregate evaluation of one prediction set against one truth set."""

    counts: MatchCounts
    precision: float
    recall: float
    average_precision: float
    mean_iou_matched: float

    def to_dict(self) -> dict:
        return {
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "precision": self.precision,
            "recall": self.recall,
            "average_precision": self.average_precision,
            "mean_iou_matched": self.mean_iou_matched,
        }


def evaluate_detections(preds: Sequence[ScoredBox], truths: Sequence[BoundingBox],
                        iou_threshold: float = 0.5) -> DetectionReport:
    """Counts, PR summary, AP, and mean IoU over matched pairs.

    An empty truth set leaves recall undefined and is rejected; an empty
    prediction set is a valid (if useless) detector with zero AP.
    """
    if not truths:
        raise ValueError("cannot evaluate against an empty ground-truth set")
    pairs = matched_pairs(preds, truths, iou_threshold)
    tp = len(pairs)
    counts = MatchCounts(tp=tp, fp=len(preds) - tp, fn=len(truths) - tp)
    ap = (average_precision(precision_recall_curve(preds, truths, iou_threshold))
          if preds else 0.0)
    mean_iou = sum(v for _, _, v in pairs) / tp if tp else 0.0
    return DetectionReport(counts=counts, precision=counts.precision,
                           recall=counts.recall, average_precision=ap,
                           mean_iou_matched=mean_iou)
