"""Height regression and pinhole ground projection."""

import math

import numpy as np
import pytest

from crowdwatch.annotations import BoundingBox
from crowdwatch.mapping import (
    Anchor,
    CameraIntrinsics,
    CorrectionUnavailable,
    GroundProjector,
    HeightCorrector,
    box_anchor,
    correct_heights,
    fit_height_model,
    map_all_to_ground,
    map_to_ground,
    uncorrected,
)

CAMERA = CameraIntrinsics()  # 10 mm focal length, 18 um pixels, 1.75 m height


def anchor(y_bottom: float, h: float, x_center: float = 0.0) -> Anchor:
    return Anchor(x_center=x_center, y_bottom=y_bottom, h=h)


class TestBoxAnchor:
    def test_direct_substitution(self):
        a = box_anchor(BoundingBox(x_left=10.0, y_top=20.0, w=4.0, h=8.0))
        assert (a.x_center, a.y_bottom, a.h) == (12.0, 12.0, 8.0)

    def test_box_touching_ground_line(self):
        a = box_anchor(BoundingBox(x_left=0.0, y_top=8.0, w=1e-9, h=8.0))
        assert a.y_bottom == 0.0

    def test_hand_evaluation(self):
        a = box_anchor(BoundingBox(x_left=100.0, y_top=500.0, w=30.0, h=60.0))
        assert (a.x_center, a.y_bottom) == (115.0, 440.0)


class TestFitHeightModel:
    def test_constant_heights_give_constant_model(self):
        anchors = [anchor(y, 50.0) for y in (0.0, 100.0, 200.0, 300.0)]
        model = fit_height_model(anchors)
        assert model.alpha0 == pytest.approx(50.0, abs=1e-9)
        assert model.alpha1 == pytest.approx(0.0, abs=1e-9)
        assert model.alpha2 == pytest.approx(0.0, abs=1e-9)
        assert all(abs(r) < 1e-9 for r in model.residuals)

    def test_exact_quadratic_recovered(self):
        # Heights sampled from h = 10 + 0.1 y + 0.001 y^2 with no noise.
        ys = (0.0, 100.0, 200.0, 300.0)
        anchors = [anchor(y, 10.0 + 0.1 * y + 0.001 * y * y) for y in ys]
        model = fit_height_model(anchors)
        assert model.alpha0 == pytest.approx(10.0, abs=1e-6)
        assert model.alpha1 == pytest.approx(0.1, abs=1e-6)
        assert model.alpha2 == pytest.approx(0.001, abs=1e-6)

    def test_two_anchors_unavailable(self):
        with pytest.raises(CorrectionUnavailable):
            fit_height_model([anchor(0.0, 10.0), anchor(10.0, 12.0)])

    def test_rank_deficient_unavailable(self):
        # Two distinct y values cannot pin down three coefficients.
        anchors = [anchor(0.0, 10.0), anchor(0.0, 12.0), anchor(100.0, 20.0)]
        with pytest.raises(CorrectionUnavailable):
            fit_height_model(anchors)

    def test_least_squares_optimality(self):
        # Perturbing any fitted coefficient must not reduce the residual sum.
        rng = np.random.default_rng(7)
        ys = rng.uniform(0.0, 1000.0, size=12)
        hs = 30.0 + 0.05 * ys + 2e-4 * ys ** 2 + rng.normal(0.0, 3.0, size=12)
        anchors = [anchor(float(y), float(h)) for y, h in zip(ys, hs)]
        model = fit_height_model(anchors)

        def sse(a0, a1, a2):
            return sum((a.h - (a0 + a1 * a.y_bottom + a2 * a.y_bottom ** 2)) ** 2
                       for a in anchors)

        best = sse(model.alpha0, model.alpha1, model.alpha2)
        for delta_index in range(3):
            for sign in (-1.0, 1.0):
                coeffs = [model.alpha0, model.alpha1, model.alpha2]
                coeffs[delta_index] += sign * 1e-3
                assert sse(*coeffs) >= best - 1e-9

    def test_matches_polyfit_oracle(self):
        rng = np.random.default_rng(11)
        ys = rng.uniform(0.0, 1500.0, size=40)
        hs = 20.0 + 0.08 * ys + 1e-4 * ys ** 2 + rng.normal(0.0, 5.0, size=40)
        anchors = [anchor(float(y), float(h)) for y, h in zip(ys, hs)]
        model = fit_height_model(anchors)
        expected = np.polynomial.polynomial.polyfit(ys, hs, deg=2)
        assert model.alpha0 == pytest.approx(expected[0], rel=1e-8, abs=1e-8)
        assert model.alpha1 == pytest.approx(expected[1], rel=1e-8, abs=1e-8)
        assert model.alpha2 == pytest.approx(expected[2], rel=1e-8, abs=1e-8)


class TestCorrectHeights:
    def test_projection_onto_constant_model(self):
        anchors = [anchor(y, 50.0) for y in (0.0, 100.0, 200.0)] + [anchor(300.0, 70.0)]
        model = fit_height_model(anchors[:3])
        corrected = correct_heights(model, anchors)
        assert corrected[3].h_c == pytest.approx(50.0, abs=1e-9)

    def test_exact_fit_leaves_heights_unchanged(self):
        ys = (0.0, 100.0, 200.0, 300.0)
        anchors = [anchor(y, 10.0 + 0.1 * y + 0.001 * y * y) for y in ys]
        model = fit_height_model(anchors)
        for original, corrected in zip(anchors, correct_heights(model, anchors)):
            assert corrected.h_c == pytest.approx(original.h, rel=1e-9)

    def test_hand_evaluated_linear_model(self):
        # g(y) = 10 + 0.1 y exactly through three points, then applied at y=100.
        fit_anchors = [anchor(0.0, 10.0), anchor(200.0, 30.0), anchor(400.0, 50.0)]
        model = fit_height_model(fit_anchors)
        (corrected,) = correct_heights(model, [anchor(100.0, 15.0)])
        assert corrected.h_c == pytest.approx(20.0, abs=1e-6)

    def test_non_positive_prediction_keeps_height_and_flags(self):
        # Falling line g(y) = 100 - 0.5 y goes negative beyond y = 200.
        fit_anchors = [anchor(0.0, 100.0), anchor(100.0, 50.0), anchor(200.0, 0.001)]
        model = fit_height_model(fit_anchors)
        assert model.predict(300.0) <= 0.0
        (corrected,) = correct_heights(model, [anchor(300.0, 40.0)])
        assert corrected.flagged
        assert corrected.h_c == 40.0

    def test_refit_on_corrected_heights_is_idempotent(self):
        rng = np.random.default_rng(3)
        ys = rng.uniform(50.0, 900.0, size=15)
        hs = 40.0 + 0.03 * ys + rng.normal(0.0, 2.0, size=15)
        anchors = [anchor(float(y), float(h)) for y, h in zip(ys, hs)]
        corrected = correct_heights(fit_height_model(anchors), anchors)
        refit_input = [anchor(a.y_bottom, a.h_c) for a in corrected]
        again = correct_heights(fit_height_model(refit_input), refit_input)
        for first, second in zip(corrected, again):
            assert second.h_c == pytest.approx(first.h_c, abs=1e-9)


class TestMapToGround:
    def test_centered_anchor_default_camera(self):
        # depth = assumed_height * focal / (pixel_size * h_c)
        point = map_to_ground(Anchor(500.0, 0.0, 100.0, h_c=100.0), CAMERA,
                              frame_width=1000)
        assert point.y == pytest.approx(1.75 * 0.010 / (100 * 18e-6), rel=1e-12)
        assert point.x == pytest.approx(0.0, abs=1e-12)
        assert point.z == 0.0

    def test_depth_for_smaller_boxes(self):
        y40 = map_to_ground(Anchor(500.0, 0.0, 40.0, h_c=40.0), CAMERA, 1000).y
        y34 = map_to_ground(Anchor(500.0, 0.0, 34.0, h_c=34.0), CAMERA, 1000).y
        assert y40 == pytest.approx(24.305555555, rel=1e-9)
        assert y34 == pytest.approx(28.594771241, rel=1e-9)

    def test_lateral_offset(self):
        point = map_to_ground(Anchor(700.0, 0.0, 100.0, h_c=100.0), CAMERA, 1000)
        assert point.x == pytest.approx(3.5, rel=1e-12)

    def test_lateral_sign_follows_side_of_center(self):
        left = map_to_ground(Anchor(100.0, 0.0, 50.0, h_c=50.0), CAMERA, 1000)
        right = map_to_ground(Anchor(900.0, 0.0, 50.0, h_c=50.0), CAMERA, 1000)
        assert left.x < 0 < right.x

    def test_depth_strictly_decreasing_in_height(self):
        depths = [map_to_ground(Anchor(0.0, 0.0, h, h_c=h), CAMERA, 1000).y
                  for h in (20.0, 40.0, 80.0, 160.0)]
        assert all(a > b for a, b in zip(depths, depths[1:]))

    def test_homothety_ratio_invariance(self):
        scaled = CameraIntrinsics(focal_length=CAMERA.focal_length * 3.0,
                                  pixel_size=CAMERA.pixel_size * 3.0,
                                  assumed_height=CAMERA.assumed_height)
        base = map_to_ground(Anchor(600.0, 0.0, 50.0, h_c=50.0), CAMERA, 1000)
        same = map_to_ground(Anchor(600.0, 0.0, 50.0, h_c=50.0), scaled, 1000)
        assert same.y == pytest.approx(base.y, rel=1e-12)
        assert same.x == pytest.approx(base.x, rel=1e-12)

    def test_missing_or_non_positive_height_rejected(self):
        with pytest.raises(ValueError):
            map_to_ground(Anchor(0.0, 0.0, 50.0), CAMERA, 1000)
        with pytest.raises(ValueError):
            map_to_ground(Anchor(0.0, 0.0, 50.0, h_c=-3.0), CAMERA, 1000)

    def test_uncorrected_fallback_then_map(self):
        anchors = uncorrected([anchor(0.0, 40.0), anchor(10.0, 50.0)])
        points = map_all_to_ground(anchors, CAMERA, 1000)
        assert len(points) == 2
        assert all(p.y > 0 for p in points)


class TestEstimators:
    def test_height_corrector_transform(self):
        X = np.array([[0.0, 0.0, 10.0], [0.0, 100.0, 20.0],
                      [0.0, 200.0, 30.0], [0.0, 300.0, 45.0]])
        corrector = HeightCorrector().fit(X)
        out = corrector.transform(X)
        expected = [corrector.model_.predict(y) for y in X[:, 1]]
        assert out[:, 2] == pytest.approx(expected)
        # untouched columns pass through
        assert out[:, 0] == pytest.approx(X[:, 0])
        assert out[:, 1] == pytest.approx(X[:, 1])

    def test_ground_projector_matches_function(self):
        X = np.array([[500.0, 0.0, 100.0], [700.0, 0.0, 100.0]])
        projector = GroundProjector(frame_width=1000).fit(X)
        out = projector.transform(X)
        direct = [map_to_ground(Anchor(x, y, h, h_c=h), CAMERA, 1000)
                  for x, y, h in X]
        assert out[:, 0] == pytest.approx([p.x for p in direct])
        assert out[:, 1] == pytest.approx([p.y for p in direct])

    def test_pipeline_composition(self):
        from sklearn.pipeline import Pipeline

        X = np.array([[500.0, 0.0, 100.0], [500.0, 100.0, 80.0],
                      [500.0, 200.0, 60.0], [500.0, 300.0, 40.0]])
        chain = Pipeline([
            ("correct", HeightCorrector()),
            ("project", GroundProjector(frame_width=1000)),
        ])
        out = chain.fit_transform(X)
        assert out.shape == (4, 2)
        assert np.all(out[:, 1] > 0)

    def test_get_params_round_trip(self):
        projector = GroundProjector(frame_width=640)
        params = projector.get_params()
        assert params["frame_width"] == 640
        clone = GroundProjector(**params)
        assert clone.get_params() == params
