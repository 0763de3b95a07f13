import math

import pytest
from hypothesis import given, strategies as st

from pcadrisk.kinematics import (
    NeighbourKind, SceneSnapshot, Vec2, VehicleState, bodies_overlap, bumper_gap, propagate, reference_points,
    static_obstacle,
)

finite = st.floats(-100, 100, allow_nan=False)


def test_vec2_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec2(math.nan, 0.0)
    with pytest.raises(ValueError):
        Vec2(0.0, math.inf)


def test_vec2_algebra():
    a, b = Vec2(1.0, 2.0), Vec2(3.0, -1.0)
    assert a + b == Vec2(4.0, 1.0)
    assert a - b == Vec2(-2.0, 3.0)
    assert 2 * a == Vec2(2.0, 4.0)
    assert a.dot(b) == 1.0
    assert a.cross(b) == -7.0
    assert Vec2(3.0, 4.0).norm() == 5.0
    assert Vec2(1.0, 0.0).rotated(math.pi / 2).y == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Vec2(0.0, 0.0).unit()


@pytest.mark.parametrize("field", ["length", "width", "mass"])
def test_vehicle_dims_positive(field):
    with pytest.raises(ValueError):
        VehicleState(Vec2(0, 0), **{field: 0.0})


def test_static_object_must_be_still():
    with pytest.raises(ValueError):
        SceneSnapshot(VehicleState(Vec2(0, 0)), VehicleState(Vec2(10, 0), Vec2(1, 0)), NeighbourKind.STATIC_OBJECT)
    snap = SceneSnapshot(VehicleState(Vec2(0, 0)), static_obstacle(10, 0), NeighbourKind.STATIC_OBJECT)
    assert snap.is_static


def _refs(ps, pn, ls=4.0, ws=2.0, ln=4.0, wn=2.0):
    s = VehicleState(Vec2(*ps), length=ls, width=ws)
    n = VehicleState(Vec2(*pn), length=ln, width=wn)
    return reference_points(SceneSnapshot(s, n))


def test_reference_points_examples():
    r = _refs((0, 0), (50, 0))
    assert r.subject_left == Vec2(2, 1) and r.subject_right == Vec2(2, -1)
    assert r.neighbour_left == Vec2(48, 1) and r.neighbour_right == Vec2(48, -1)
    r = _refs((10, -3), (40, -3), ls=5.0)
    assert r.subject_left == Vec2(12.5, -2) and r.subject_right == Vec2(12.5, -4)


def test_reference_points_neighbour_behind_face_each_other():
    r = _refs((0, 0), (-30, 0))
    assert r.subject_left == Vec2(-2, 1)
    assert r.neighbour_left == Vec2(-28, 1)


@given(finite, finite, finite, finite)
def test_reference_offsets_are_half_dims(x, y, xn, yn):
    r = _refs((x, y), (xn, yn))
    assert abs(r.subject_left.y - r.subject_right.y) == pytest.approx(2.0)
    assert abs(r.subject_left.x - x) == pytest.approx(2.0)
    assert abs(r.neighbour_left.x - xn) == pytest.approx(2.0)


def test_propagate_examples():
    s = propagate(VehicleState(Vec2(0, 0), Vec2(10, 0)), 1.0)
    assert s.position == Vec2(10, 0)
    s = propagate(VehicleState(Vec2(0, 0), Vec2(10, 0), Vec2(-2, 0)), 2.0)
    assert s.position == Vec2(16, 0) and s.velocity == Vec2(6, 0)
    rest = VehicleState(Vec2(1, 2))
    assert propagate(rest, 5.0) == rest
    with pytest.raises(ValueError):
        propagate(rest, -0.1)


@given(finite, finite, finite, st.floats(0, 10), st.floats(0, 10))
def test_propagate_composes(v, a, y, t1, t2):
    s = VehicleState(Vec2(0.0, y), Vec2(v, -v / 3), Vec2(a, a / 2))
    two = propagate(propagate(s, t1), t2)
    one = propagate(s, t1 + t2)
    assert two.position.x == pytest.approx(one.position.x, abs=1e-9 * (1 + abs(one.position.x)))
    assert two.position.y == pytest.approx(one.position.y, abs=1e-9 * (1 + abs(one.position.y)))


def test_overlap_and_gap():
    a = VehicleState(Vec2(0, 0))
    assert bodies_overlap(a, VehicleState(Vec2(4, 0)))  # touching
    assert not bodies_overlap(a, VehicleState(Vec2(4.01, 0)))
    assert not bodies_overlap(a, VehicleState(Vec2(0, 2.5)))
    assert bumper_gap(SceneSnapshot(a, VehicleState(Vec2(30, 0)))) == 26.0
