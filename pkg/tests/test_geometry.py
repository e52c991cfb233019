"""Boxes, motions, overlap metrics, and the OTB-style box file format."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from infotrack.geometry import (BoundingBox, Transformation, center_distance,
                                clamp_log_scale, compose, compose_batch,
                                format_box, iou, parse_box_line,
                                read_box_file, write_box_file)

finite_coord = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)
positive_size = st.floats(min_value=1e-3, max_value=1e4, allow_nan=False)
boxes = st.builds(BoundingBox, finite_coord, finite_coord, positive_size, positive_size)
shifts = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
log_scales = st.floats(min_value=-math.log(2.0), max_value=math.log(2.0),
                       allow_nan=False)
motions = st.builds(Transformation, shifts, shifts, log_scales)


def test_box_rejects_nonpositive_size():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 10)
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 10, -1)


def test_transformation_rejects_large_scale():
    with pytest.raises(ValueError):
        Transformation(0, 0, math.log(2.0) + 0.01)


def test_clamp_log_scale():
    assert clamp_log_scale(5.0) == math.log(2.0)
    assert clamp_log_scale(-5.0) == -math.log(2.0)
    assert clamp_log_scale(0.1) == 0.1


def test_compose_identity_exact():
    box = BoundingBox(10, 10, 20, 20)
    assert compose(box, Transformation(0, 0, 0)) == box


def test_compose_translation():
    out = compose(BoundingBox(10, 10, 20, 20), Transformation(5, -3, 0))
    assert (out.x, out.y, out.w, out.h) == (15.0, 7.0, 20.0, 20.0)


def test_compose_scale_about_center():
    out = compose(BoundingBox(0, 0, 10, 10), Transformation(0, 0, math.log(2.0)))
    assert out.w == pytest.approx(20.0)
    assert out.h == pytest.approx(20.0)
    assert out.center == pytest.approx((5.0, 5.0))
    assert (out.x, out.y) == pytest.approx((-5.0, -5.0))


@given(boxes, motions)
def test_compose_then_inverse_recovers_box(box, motion):
    back = compose(compose(box, motion), motion.inverse())
    assert back.x == pytest.approx(box.x, rel=1e-9, abs=1e-9)
    assert back.y == pytest.approx(box.y, rel=1e-9, abs=1e-9)
    assert back.w == pytest.approx(box.w, rel=1e-9)
    assert back.h == pytest.approx(box.h, rel=1e-9)


@given(boxes, shifts, shifts, shifts, shifts)
def test_translations_commute(box, dx1, dy1, dx2, dy2):
    a = compose(compose(box, Transformation(dx1, dy1, 0)), Transformation(dx2, dy2, 0))
    b = compose(compose(box, Transformation(dx2, dy2, 0)), Transformation(dx1, dy1, 0))
    assert a.x == pytest.approx(b.x, abs=1e-9)
    assert a.y == pytest.approx(b.y, abs=1e-9)


def test_compose_batch_matches_compose():
    box = BoundingBox(3, 4, 12, 8)
    rows = np.array([[5.0, -3.0, 0.0], [0.0, 0.0, 0.2], [-1.0, 2.0, -0.4]])
    out = compose_batch(box, rows)
    for row, motion in zip(out, rows):
        single = compose(box, Transformation(*motion))
        assert np.allclose(row, [single.x, single.y, single.w, single.h])


def test_iou_identical_and_disjoint():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(100, 100, 5, 5)) == 0.0


def test_iou_half_overlap():
    # intersection 50, union 150
    a = BoundingBox(0, 0, 10, 10)
    b = BoundingBox(5, 0, 10, 10)
    assert iou(a, b) == pytest.approx(1.0 / 3.0)


@given(boxes, boxes)
def test_iou_bounds_and_symmetry(a, b):
    v = iou(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(iou(b, a))


def test_center_distance():
    a = BoundingBox(0, 0, 2, 2)  # center (1, 1)
    assert center_distance(a, a) == 0.0
    b = BoundingBox(3, 4, 2, 2)  # center (4, 5): 3-4-5 triangle
    assert center_distance(a, b) == pytest.approx(5.0)
    assert center_distance(a, b) == center_distance(b, a)


def test_format_parse_round_trip():
    box = BoundingBox(1.25, -3.5, 10.125, 7.0)
    assert parse_box_line(format_box(box)) == box


def test_parse_box_line_errors_carry_line_number():
    with pytest.raises(ValueError, match="line 12"):
        parse_box_line("1,2,3", lineno=12)
    with pytest.raises(ValueError, match="line 3"):
        parse_box_line("1,2,x,4", lineno=3)
    with pytest.raises(ValueError, match="line 7"):
        parse_box_line("1,2,0,4", lineno=7)  # zero width


def test_box_file_round_trip(tmp_path):
    path = str(tmp_path / "gt.txt")
    boxes = [BoundingBox(0, 0, 4, 4), BoundingBox(1.5, 2.5, 3.25, 4.75)]
    write_box_file(path, boxes)
    assert read_box_file(path) == boxes


def test_read_box_file_skips_blank_lines(tmp_path):
    path = tmp_path / "gt.txt"
    path.write_text("1,2,3,4\n\n5,6,7,8\n")
    assert len(read_box_file(str(path))) == 2
