import math

import numpy as np
import pytest
import shapely
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import LineString, Point, Polygon

from kitchentamp import geometry as geo

coord = st.floats(-2, 2, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)
pose = st.tuples(coord, coord, angle)
size = st.floats(0.01, 0.5)


@st.composite
def shapes(draw):
    kind = draw(st.sampled_from(["box", "disc", "capsule"]))
    x, y, th = draw(pose)
    if kind == "box":
        return geo.box(draw(size), draw(size), (x, y, th))
    if kind == "disc":
        return geo.disc(x, y, draw(size))
    L = draw(size)
    return geo.capsule((x, y), (x + L * math.cos(th), y + L * math.sin(th)), draw(st.floats(0.005, 0.2)))


def to_shapely_core(s):
    v = s.verts
    return Point(v[0]) if len(v) == 1 else LineString(v) if len(v) == 2 else Polygon(v)


def exact_gap(a, b):
    """Signed clearance from shapely on the cores; negative means overlap depth for round shapes."""
    ca, cb = to_shapely_core(a), to_shapely_core(b)
    return ca.distance(cb) - a.radius - b.radius


@given(pose, st.tuples(coord, coord))
def test_transform_inverse_roundtrip(p, pt):
    back = geo.transform(geo.invert(p), geo.transform(p, pt))
    assert back == pytest.approx(pt, abs=1e-9)


@given(pose, pose)
def test_compose_matches_sequential_transform(a, b):
    pt = (0.3, -0.2)
    assert geo.transform(geo.compose(a, b), pt) == pytest.approx(geo.transform(a, geo.transform(b, pt)), abs=1e-9)


@given(shapes(), shapes())
def test_collides_is_symmetric(a, b):
    assert geo.collides(a, b) == geo.collides(b, a)


@given(shapes(), shapes())
def test_collides_agrees_with_shapely_away_from_contact(a, b):
    gap = exact_gap(a, b)
    if abs(gap) < 1e-7:
        return
    if a.radius == 0 and b.radius == 0:
        overlap = shapely.intersects(to_shapely_core(a), to_shapely_core(b))
    else:
        overlap = gap < 0
    assert geo.collides(a, b) == overlap


@given(shapes(), shapes())
def test_distance_matches_shapely(a, b):
    assert geo.distance(a, b) == pytest.approx(max(0.0, exact_gap(a, b)), abs=1e-9)


@given(shapes())
def test_aabb_contains_shape(s):
    x0, y0, x1, y1 = s.aabb
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(x0 - 0.1, x1 + 0.1, 500), rng.uniform(y0 - 0.1, y1 + 0.1, 500)])
    inside = geo.distance_field(s, pts) <= 0
    assert np.all((pts[inside, 0] >= x0 - 1e-12) & (pts[inside, 0] <= x1 + 1e-12))
    assert np.all((pts[inside, 1] >= y0 - 1e-12) & (pts[inside, 1] <= y1 + 1e-12))


@given(shapes(), st.lists(st.tuples(coord, coord), min_size=1, max_size=20))
def test_distance_field_matches_point_distance(s, pts):
    field = geo.distance_field(s, np.array(pts))
    for p, d in zip(pts, field):
        if d > 0:
            assert d == pytest.approx(geo.point_distance(s, p), abs=1e-9)
        else:
            assert geo.point_distance(s, p) <= 1e-9


def test_touching_counts_as_contact():
    a = geo.rect(0, 0, 1, 1)
    assert geo.collides(a, geo.rect(1, 0, 2, 1))
    assert not geo.collides(a, geo.rect(1 + 1e-6, 0, 2, 1))
    assert geo.collides(geo.disc(0, 0, 1), geo.disc(2, 0, 1))


def test_contains_shape_with_inset():
    outer = geo.rect(0, 0, 1, 1)
    assert geo.contains_shape(outer, geo.disc(0.5, 0.5, 0.2), 0.1)
    assert not geo.contains_shape(outer, geo.disc(0.5, 0.5, 0.45), 0.1)
    with pytest.raises(ValueError):
        geo.contains_shape(geo.disc(0, 0, 1), geo.disc(0, 0, 0.1))


def test_invalid_shapes_rejected():
    with pytest.raises(ValueError):
        geo.Shape(((0, 0), (0, 1), (1, 0)))  # clockwise
    with pytest.raises(ValueError):
        geo.rect(1, 0, 0, 1)
    with pytest.raises(ValueError):
        geo.Shape(((0, 0),), -1.0)


def test_area_of_capsule():
    c = geo.capsule((0, 0), (1, 0), 0.5)
    assert c.area == pytest.approx(1.0 + math.pi * 0.25)
