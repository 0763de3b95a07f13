import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import snapshot
from pcadrisk.kinematics import SceneSnapshot, Vec2, VehicleState
from pcadrisk.looming import (
    DegenerateGeometry, bearing_rate, distance_rate, is_looming, looming_mask, pair_geometry,
)


def test_bearing_rate_examples():
    assert bearing_rate(Vec2(0, 0), Vec2(50, 0), Vec2(10, 0), Vec2(10, 0)) == 0.0
    assert bearing_rate(Vec2(0, 0), Vec2(10, 0), Vec2(0, 0), Vec2(0, 1)) == pytest.approx(-0.1)
    assert bearing_rate(Vec2(0, 0), Vec2(30, 0), Vec2(20, 0), Vec2(-5, 0)) == 0.0
    with pytest.raises(DegenerateGeometry):
        bearing_rate(Vec2(1, 1), Vec2(1, 1), Vec2(0, 0), Vec2(0, 0))


def test_bearing_rate_matches_finite_difference():
    pa, pb, va, vb = Vec2(0, 0), Vec2(10, 0), Vec2(0, 0), Vec2(0, 1)
    h = 1e-6

    def angle(t):
        # clockwise line-of-sight angle from a to b
        d = (pb + vb * t) - (pa + va * t)
        return -math.atan2(d.y, d.x)

    fd = (angle(h) - angle(-h)) / (2 * h)
    assert bearing_rate(pa, pb, va, vb) == pytest.approx(fd, rel=1e-6)


def test_distance_rate_examples():
    rate = distance_rate(Vec2(0, 0), Vec2(54, 0), Vec2(16.67, 0), Vec2(8.33, 0))
    assert rate == pytest.approx(-8.34)
    assert distance_rate(Vec2(0, 0), Vec2(30, 0), Vec2(5, 0), Vec2(5, 0)) == 0.0
    assert distance_rate(Vec2(0, 0), Vec2(30, 0), Vec2(5, 0), Vec2(9, 0)) > 0


def test_is_looming_examples(multi_options):
    assert is_looming(multi_options)
    assert not is_looming(snapshot(30.0))
    # overtaking an adjacent-lane car with 5 m of lateral clearance
    assert not is_looming(snapshot(30.0, 7.0, vn=(20.0, 0.0)))


def test_overrides_replace_velocities(multi_options):
    assert not is_looming(multi_options, v_s_override=Vec2(8.33, 0.0))
    assert is_looming(multi_options, v_n_override=Vec2(0.0, 0.0))


coord = st.floats(-80, 80, allow_nan=False)
speed = st.floats(-30, 30, allow_nan=False)


@given(coord, coord, speed, speed, speed, speed, speed, speed, coord, coord)
def test_galilean_and_translation_invariance(xn, yn, vsx, vsy, vnx, vny, cx, cy, tx, ty):
    assume(abs(xn) > 4.5 or abs(yn) > 2.5)
    assume(abs(xn) > 1e-3)  # side by side, the facing end is ambiguous
    s = SceneSnapshot(VehicleState(Vec2(0, 0), Vec2(vsx, vsy)), VehicleState(Vec2(xn, yn), Vec2(vnx, vny)))
    shift = Vec2(cx, cy)
    moved = SceneSnapshot(
        VehicleState(Vec2(tx, ty), Vec2(vsx, vsy) + shift),
        VehicleState(Vec2(xn + tx, yn + ty), Vec2(vnx, vny) + shift),
    )
    eps = 1e-6  # float rounding at the boundary
    assert is_looming(s, eps=eps) == is_looming(moved, eps=eps) or _near_boundary(s)


def _near_boundary(s):
    r, c = pair_geometry(s)
    w = s.subject.velocity - s.neighbour.velocity
    rates = [(r[k, 0] * w.y - r[k, 1] * w.x) / (r[k] @ r[k]) for k in range(4)]
    ddot = (c[0] * w.x + c[1] * w.y) / np.hypot(*c)
    return min(abs(x) for x in rates) < 1e-5 or abs(ddot) < 1e-5


@given(coord, coord, speed, speed)
def test_vectorised_mask_matches_scalar(xn, yn, wx, wy):
    assume(abs(xn) > 4.5 or abs(yn) > 2.5)
    s = snapshot(xn, yn, vs=(0.0, 0.0), vn=(0.0, 0.0))
    r, c = pair_geometry(s)
    scalar = is_looming(s, v_s_override=Vec2(wx, wy))
    assert bool(looming_mask(r, c, np.array(wx), np.array(wy))) == scalar
