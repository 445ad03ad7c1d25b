"""Bounding-box height correction and image-to-ground coordinate mapping.

Each detected box is reduced to an anchor (horizontal center, ground-contact
line, height).  Per image, box heights are regressed on the anchor's vertical
position with a quadratic, and every height is replaced by the fitted value;
this pulls children and seated people toward the standing-adult height the
projection assumes.  Corrected anchors are then back-projected to planar
ground coordinates through an ideal pinhole camera whose axis is parallel to
the ground: an object of known real height standing h_c pixels tall on the
sensor sits at depth assumed_height * focal_length / (pixel_size * h_c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .annotations import BoundingBox

#: Condition-number ceiling for the 3x3 normal system of the height fit.
CONDITION_LIMIT = 1e12


class CorrectionUnavailable(ValueError):
    """Raised when the quadratic height fit is underdetermined or degenerate."""


@dataclass(frozen=True)
class CameraIntrinsics:
    """Ideal pinhole parameters, all in meters."""

    focal_length: float = 0.010
    pixel_size: float = 18e-6
    assumed_height: float = 1.75

    def __post_init__(self) -> None:
        if self.focal_length <= 0 or self.pixel_size <= 0 or self.assumed_height <= 0:
            raise ValueError("camera parameters must be positive")


@dataclass(frozen=True)
class Anchor:
    """Localization anchor of one box: center column, ground line, height.

    ``h_c`` is the corrected height once a fit has been applied; ``flagged``
    marks anchors whose fitted height was non-positive and therefore kept
    their original height.
    """

    x_center: float
    y_bottom: float
    h: float
    h_c: float | None = None
    flagged: bool = False


@dataclass(frozen=True)
class GroundPoint:
    """Estimated planar position in meters; the ground plane fixes z at 0."""

    x: float
    y: float
    z: float = 0.0

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class QuadraticHeightModel:
    """Fitted height trend h(y_bottom) = a0 + a1*y + a2*y^2 plus residuals."""

    alpha0: float
    alpha1: float
    alpha2: float
    residuals: tuple[float, ...]
    sample_count: int

    def predict(self, y_bottom: float) -> float:
        return self.alpha0 + self.alpha1 * y_bottom + self.alpha2 * y_bottom * y_bottom

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.alpha0, self.alpha1, self.alpha2)


def box_anchor(box: BoundingBox) -> Anchor:
    """Anchor of a box: x_center = x_left + w/2, y_bottom = y_top - h."""
    return Anchor(x_center=box.x_left + box.w / 2.0,
                  y_bottom=box.y_top - box.h,
                  h=box.h)


def _fit_quadratic(y: np.ndarray, h: np.ndarray,
                   cond_limit: float = CONDITION_LIMIT) -> tuple[float, float, float]:
    """Least-squares quadratic through (y, h) via the 3x3 normal equations.

    The fit runs in standardized y to keep the normal system well
    conditioned (raw pixel coordinates push its condition number past the
    guard); coefficients are expanded back to the raw variable.
    """
    mu = float(y.mean())
    sd = float(y.std())
    if sd == 0.0:
        raise CorrectionUnavailable("all anchors share one y_bottom value")
    u = (y - mu) / sd

    design = np.column_stack([np.ones_like(u), u, u * u])
    normal = design.T @ design
    if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > cond_limit:
        raise CorrectionUnavailable("normal system is rank deficient")
    b0, b1, b2 = np.linalg.solve(normal, design.T @ h)

    alpha0 = b0 - b1 * mu / sd + b2 * mu * mu / (sd * sd)
    alpha1 = b1 / sd - 2.0 * b2 * mu / (sd * sd)
    alpha2 = b2 / (sd * sd)
    return float(alpha0), float(alpha1), float(alpha2)


def fit_height_model(anchors: Sequence[Anchor],
                     cond_limit: float = CONDITION_LIMIT) -> QuadraticHeightModel:
    """Fit the per-image quadratic height trend over all anchors.

    Raises :class:`CorrectionUnavailable` with fewer than three anchors or
    fewer than three distinct ground lines; callers fall back to the
    uncorrected heights.
    """
    if len(anchors) < 3:
        raise CorrectionUnavailable(f"need at least 3 anchors, got {len(anchors)}")
    y = np.array([a.y_bottom for a in anchors], dtype=float)
    h = np.array([a.h for a in anchors], dtype=float)
    alpha = _fit_quadratic(y, h, cond_limit)
    if not all(math.isfinite(c) for c in alpha):
        raise CorrectionUnavailable("fit produced non-finite coefficients")
    model = QuadraticHeightModel(*alpha, residuals=(), sample_count=len(anchors))
    residuals = tuple(float(hi - model.predict(yi)) for yi, hi in zip(y, h))
    return replace(model, residuals=residuals)


def correct_heights(model: QuadraticHeightModel,
                    anchors: Sequence[Anchor]) -> list[Anchor]:
    """Project each anchor's height onto the fitted curve: h_c = g(y_bottom).

    Anchors whose fitted height would be non-positive keep their original
    height and come back flagged.
    """
    corrected = []
    for a in anchors:
        g = model.predict(a.y_bottom)
        if g > 0:
            corrected.append(replace(a, h_c=float(g), flagged=False))
        else:
            corrected.append(replace(a, h_c=a.h, flagged=True))
    return corrected


def uncorrected(anchors: Sequence[Anchor]) -> list[Anchor]:
    """Fallback when no height model is available: h_c = h."""
    return [replace(a, h_c=a.h, flagged=False) for a in anchors]


def map_to_ground(anchor: Anchor, cam: CameraIntrinsics,
                  frame_width: float) -> GroundPoint:
    """Back-project one corrected anchor to ground coordinates in meters.

    The principal point is taken at the horizontal frame center, so the
    lateral coordinate is signed: negative left of the camera axis.
    """
    h_c = anchor.h_c
    if h_c is None:
        raise ValueError("anchor has no corrected height; run correct_heights first")
    if h_c <= 0:
        raise ValueError(f"corrected height must be positive, got {h_c}")
    h_bar = cam.pixel_size * h_c
    x_bar = cam.pixel_size * (anchor.x_center - frame_width / 2.0)
    depth = cam.assumed_height * cam.focal_length / h_bar
    lateral = x_bar * cam.assumed_height / h_bar
    return GroundPoint(x=lateral, y=depth)


def map_all_to_ground(anchors: Sequence[Anchor], cam: CameraIntrinsics,
                      frame_width: float) -> list[GroundPoint]:
    return [map_to_ground(a, cam, frame_width) for a in anchors]


# --------------------------------------------------------------------------
# Estimator API.  Anchor arrays are (n, 3) float arrays with columns
# (x_center, y_bottom, h), which both transformers below preserve so they
# chain in an sklearn Pipeline.

def anchors_to_array(anchors: Sequence[Anchor], corrected: bool = False) -> np.ndarray:
    """Stack anchors into an (n, 3) array of (x_center, y_bottom, height)."""
    height = (lambda a: a.h_c if corrected else a.h)
    return np.array([[a.x_center, a.y_bottom, height(a)] for a in anchors],
                    dtype=float).reshape(-1, 3)


class HeightCorrector(BaseEstimator, TransformerMixin):
    """Transformer replacing box heights with the fitted quadratic trend.

    ``fit`` expects an (n, 3) anchor array and learns the trend from columns
    1 and 2 (y_bottom, h); ``transform`` returns the array with column 2
    corrected.  Rows whose fitted height is non-positive keep their input
    height.
    """

    def __init__(self, cond_limit: float = CONDITION_LIMIT):
        self.cond_limit = cond_limit

    def fit(self, X, y=None) -> "HeightCorrector":
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 columns (x_center, y_bottom, h), got {X.shape[1]}")
        anchors = [Anchor(x_center=r[0], y_bottom=r[1], h=r[2]) for r in X]
        self.model_ = fit_height_model(anchors, cond_limit=self.cond_limit)
        self.coef_ = np.array(self.model_.coefficients)
        self.residuals_ = np.array(self.model_.residuals)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        g = (self.coef_[0] + self.coef_[1] * X[:, 1]
             + self.coef_[2] * X[:, 1] ** 2)
        out = X.copy()
        out[:, 2] = np.where(g > 0, g, X[:, 2])
        return out


class GroundProjector(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping anchor arrays to ground coordinates.

    ``transform`` takes an (n, 3) anchor array with corrected heights in
    column 2 and returns an (n, 2) array of (lateral, depth) in meters.
    ``frame_width`` locates the principal point at frame_width / 2; leave it
    at 0 if x_center is already measured from the camera axis.
    """

    def __init__(self, focal_length: float = 0.010, pixel_size: float = 18e-6,
                 assumed_height: float = 1.75, frame_width: float = 0.0):
        self.focal_length = focal_length
        self.pixel_size = pixel_size
        self.assumed_height = assumed_height
        self.frame_width = frame_width

    def _camera(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.focal_length, self.pixel_size, self.assumed_height)

    def fit(self, X, y=None) -> "GroundProjector":
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 columns (x_center, y_bottom, h_c), got {X.shape[1]}")
        self._camera()
        self.n_features_in_ = 3
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=float)
        cam = self._camera()
        h_c = X[:, 2]
        if np.any(h_c <= 0):
            raise ValueError("corrected heights must be positive")
        h_bar = cam.pixel_size * h_c
        x_bar = cam.pixel_size * (X[:, 0] - self.frame_width / 2.0)
        depth = cam.assumed_height * cam.focal_length / h_bar
        lateral = x_bar * cam.assumed_height / h_bar
        return np.column_stack([lateral, depth])
