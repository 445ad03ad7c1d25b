"""Annotation parsing, human filtering, and round-trip serialization."""

import pytest

from crowdwatch.annotations import (
    BoundingBox,
    RawAnnotation,
    filter_humans,
    human_annotations,
    parse_annotations,
    serialize_annotations,
    to_bounding_box,
)


class TestParseAnnotations:
    def test_empty_input_gives_empty_frame(self):
        frame = parse_annotations("", 100, 100)
        assert frame.annotations == ()
        assert frame.skipped == ()

    def test_field_order(self):
        frame = parse_annotations("10,20,4,8,1,1,0,0", 100, 100)
        (ann,) = frame.annotations
        assert ann == RawAnnotation(bbox_left=10, bbox_top=20, bbox_width=4,
                                    bbox_height=8, score=1.0, category=1,
                                    truncation=0, occlusion=0)

    def test_zero_width_line_collected_as_error(self):
        frame = parse_annotations("10,20,0,8,1,1,0,0", 100, 100)
        assert frame.annotations == ()
        assert len(frame.skipped) == 1
        lineno, reason = frame.skipped[0]
        assert lineno == 1
        assert "0x8" in reason

    def test_short_line_error_does_not_stop_parsing(self):
        frame = parse_annotations("1,2,3\n10,20,4,8,1,1,0,0", 100, 100)
        assert len(frame.annotations) == 1
        assert len(frame.skipped) == 1
        assert frame.skipped[0][0] == 1

    def test_negative_origin_rejected(self):
        frame = parse_annotations("-5,20,4,8,1,1,0,0", 100, 100)
        assert frame.annotations == ()
        assert len(frame.skipped) == 1

    def test_box_fully_outside_frame_rejected(self):
        frame = parse_annotations("200,20,4,8,1,1,0,0", 100, 100)
        assert frame.annotations == ()
        assert len(frame.skipped) == 1

    def test_overhanging_box_clamped_to_frame(self):
        frame = parse_annotations("90,20,20,8,1,1,0,0", 100, 100)
        (ann,) = frame.annotations
        assert ann.bbox_left == 90
        assert ann.bbox_width == 10

    def test_trailing_comma_and_blank_lines_tolerated(self):
        frame = parse_annotations("10,20,4,8,1,1,0,0,\n\n30,40,5,10,1,2,0,0\n", 100, 100)
        assert len(frame.annotations) == 2
        assert frame.skipped == ()

    def test_confidence_scores_parsed_as_float(self):
        frame = parse_annotations("10,20,4,8,0.87,1,0,0", 100, 100)
        assert frame.annotations[0].score == pytest.approx(0.87)

    def test_round_trip_is_lossless_for_kept_lines(self):
        text = "10,20,4,8,1,1,0,0\n30,40,5,10,0.87,2,1,2"
        frame = parse_annotations(text, 100, 100)
        assert serialize_annotations(frame) == text


class TestFilterHumans:
    def test_pedestrian_and_people_kept_others_dropped(self):
        text = "\n".join([
            "10,10,4,8,1,4,0,0",   # car
            "20,10,4,8,1,1,0,0",   # pedestrian
            "30,10,4,8,1,2,0,0",   # people
        ])
        frame = parse_annotations(text, 100, 100)
        assert len(filter_humans(frame)) == 2

    def test_center_inside_ignored_region_dropped(self):
        text = "\n".join([
            "0,0,50,50,1,0,0,0",    # ignored region
            "20,20,4,8,1,1,0,0",    # center (22, 24) inside the region
        ])
        frame = parse_annotations(text, 100, 100)
        assert filter_humans(frame) == []

    def test_center_outside_ignored_region_kept(self):
        text = "\n".join([
            "0,0,10,10,1,0,0,0",
            "20,20,4,8,1,1,0,0",
        ])
        frame = parse_annotations(text, 100, 100)
        assert len(filter_humans(frame)) == 1

    def test_y_axis_flipped_to_upward_positive(self):
        frame = parse_annotations("10,100,4,8,1,1,0,0", 480, 360)
        (box,) = filter_humans(frame)
        assert box.y_top == 260.0
        assert box.x_left == 10.0

    def test_no_kept_center_lies_in_any_ignored_region(self):
        text = "\n".join([
            "0,0,30,30,1,0,0,0",
            "40,40,30,30,1,0,0,0",
            "10,10,4,8,1,1,0,0",
            "50,50,4,8,1,2,0,0",
            "80,10,4,8,1,1,0,0",
        ])
        frame = parse_annotations(text, 100, 100)
        regions = [a for a in frame.annotations if a.category == 0]
        kept = human_annotations(frame)
        assert kept
        for ann in kept:
            assert not any(r.contains(ann.center()) for r in regions)

    def test_output_never_larger_than_input(self):
        text = "\n".join(f"{10 * i},10,4,8,1,{i % 3},0,0" for i in range(1, 9))
        frame = parse_annotations(text, 100, 100)
        assert len(filter_humans(frame)) <= len(frame.annotations)


class TestBoundingBox:
    def test_conversion_from_raw(self):
        ann = RawAnnotation(bbox_left=10, bbox_top=100, bbox_width=4,
                            bbox_height=8, score=1.0, category=1,
                            truncation=0, occlusion=0)
        box = to_bounding_box(ann, frame_height=360)
        assert box == BoundingBox(x_left=10.0, y_top=260.0, w=4.0, h=8.0)

    def test_rejects_non_positive_size(self):
        with pytest.raises(ValueError):
            BoundingBox(x_left=0.0, y_top=10.0, w=0.0, h=5.0)
        with pytest.raises(ValueError):
            BoundingBox(x_left=0.0, y_top=10.0, w=5.0, h=-1.0)
