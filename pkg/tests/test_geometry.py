import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from expandolab import geometry as geo
from expandolab.errors import EmptySingularSet, SingularTransform
from expandolab.maps import TRIANGLE_0, TRIANGLE_1, tent2d

UNIT_TRI = geo.polygon([(0, 0), (1, 0), (1, 1)])


def as_shapely(p):
    return shapely.Polygon(p.vertices) if not p.is_empty else shapely.Polygon()


def random_convex(rng, n=8, scale=1.0):
    pts = rng.uniform(-scale, scale, size=(n, 2)) + rng.uniform(-1, 1, size=2)
    return geo.convex_hull(pts)


def test_clip_triangle_by_vertical_line():
    out = geo.clip_halfplane(UNIT_TRI, geo.HalfPlane(1.0, 0.0, 0.5))
    assert out.measure == pytest.approx(0.125, abs=1e-15)
    assert sorted(out.vertices) == sorted([(0.0, 0.0), (0.5, 0.0), (0.5, 0.5)])


def test_clip_by_containing_halfplane_is_identity():
    out = geo.clip_halfplane(UNIT_TRI, geo.HalfPlane(1.0, 0.0, 5.0))
    assert out == UNIT_TRI


def test_clip_t0_beyond_its_edge_is_empty():
    out = geo.clip_halfplane(TRIANGLE_0, geo.HalfPlane(-1.0, 0.0, -1.0))  # x >= 1
    assert out.is_empty and out.measure == 0.0


def test_intersect_examples():
    assert geo.intersect(TRIANGLE_0, TRIANGLE_1).is_empty
    assert geo.intersect(TRIANGLE_0, TRIANGLE_0).measure == pytest.approx(0.5)
    sq = geo.square(0.0, 0.0, 1.0)
    out = geo.intersect(TRIANGLE_0, sq)
    assert out.measure == pytest.approx(0.5, abs=1e-15)


def test_measures():
    assert TRIANGLE_0.measure + TRIANGLE_1.measure == pytest.approx(1.0)
    assert geo.measure(geo.Interval(0.0, 2.0)) == 2.0
    assert geo.measure(geo.EMPTY_POLYGON) == 0.0


def test_affine_image_examples():
    two_x = geo.AffineTransform([[2.0]], [0.0])
    assert geo.affine_image(geo.Interval(0.0, 1.0), two_x) == geo.Interval(0.0, 2.0)
    t = geo.AffineTransform([[1.0, 1.0], [1.0, -1.0]], [0.0, 0.0])
    assert geo.affine_image(TRIANGLE_0, t).measure == pytest.approx(1.0)
    ident = geo.AffineTransform.identity(2)
    assert geo.affine_image(TRIANGLE_0, ident).measure == pytest.approx(TRIANGLE_0.measure)


def test_singular_transform_raises():
    flat = geo.AffineTransform([[1.0, 2.0], [2.0, 4.0]], [0.0, 0.0])
    with pytest.raises(SingularTransform):
        geo.affine_image(TRIANGLE_0, flat)


def test_contains_and_tie_break():
    assert geo.contains(TRIANGLE_0, (0.5, 0.25))
    assert geo.contains(TRIANGLE_0, (1.0, 0.5))
    assert not geo.contains(TRIANGLE_1, (1.0, 0.5), lower=[TRIANGLE_0])
    assert geo.locate([TRIANGLE_0, TRIANGLE_1], (1.0, 0.5)) == 0
    assert not geo.contains(geo.Interval(0.0, 1.0), 1.5)


def test_distance_examples():
    assert geo.distance_to_set(0.3, geo.SegmentSet(np.array([0.0, 1.0, 2.0]))) == pytest.approx(0.3)
    assert geo.distance_to_set((1.5, 0.1), tent2d(1.0).singular) == pytest.approx(0.1)
    assert geo.distance_to_set((0.5, 0.0), tent2d(1.0).singular) == 0.0
    with pytest.raises(EmptySingularSet):
        geo.distance_to_set(0.3, geo.SegmentSet(np.zeros(0)))


def test_polygon_normalises():
    p = geo.polygon([(1, 1), (0, 0), (1, 0), (1, 0), (0.5, 0.0)])  # clockwise, duplicate, collinear
    assert len(p.vertices) == 3
    assert p.measure > 0
    assert geo.polygon([(0, 0), (1, 1), (2, 2)]).is_empty


def test_affine_measure_scales_by_det_random(rng):
    """1000 random convex polygons under random affine maps."""
    for _ in range(1000):
        poly = random_convex(rng)
        lin = rng.normal(size=(2, 2))
        if abs(np.linalg.det(lin)) < 1e-3:
            continue
        t = geo.AffineTransform(lin, rng.normal(size=2))
        img = geo.affine_image(poly, t)
        assert img.measure == pytest.approx(abs(np.linalg.det(lin)) * poly.measure, rel=1e-9)


def test_intersection_matches_shapely(rng):
    for _ in range(300):
        a, b = random_convex(rng), random_convex(rng)
        ours = geo.intersect(a, b, 0.0)
        ref = as_shapely(a).intersection(as_shapely(b)).area
        assert ours.measure == pytest.approx(ref, abs=1e-12)
        assert geo.intersect(b, a, 0.0).measure == pytest.approx(ours.measure, abs=1e-12)


def test_halfplane_pieces_partition(rng):
    for _ in range(200):
        p = random_convex(rng)
        a, b = rng.normal(size=2)
        c = float(rng.normal())
        left = geo.clip_halfplane(p, geo.HalfPlane(a, b, c), 0.0)
        right = geo.clip_halfplane(p, geo.HalfPlane(-a, -b, -c), 0.0)
        assert left.measure + right.measure == pytest.approx(p.measure, rel=1e-9, abs=1e-14)


def test_halfplanes_reconstruct_region():
    for hp in geo.halfplanes(TRIANGLE_1):
        assert math.hypot(hp.a, hp.b) == pytest.approx(1.0)
        for v in TRIANGLE_1.vertices:
            assert hp.slack(v) >= -1e-12


def test_compose_and_inverse():
    f = geo.AffineTransform([[2.0, 1.0], [0.0, 3.0]], [1.0, -1.0])
    g = geo.AffineTransform([[0.5, 0.0], [1.0, 1.0]], [0.0, 2.0])
    x = (0.3, -0.7)
    assert np.allclose(f.compose(g)(x), f(g(x)))
    assert np.allclose(f.inverse()(f(x)), x)
    assert f.compose(g).jacobian == pytest.approx(f.jacobian * g.jacobian)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.0, 5.0))
def test_interval_clip_is_intersection(lo, width, cut):
    iv = geo.Interval(min(lo, lo + width), max(lo, lo + width))
    out = geo.clip_halfplane(iv, geo.HalfPlane(1.0, 0.0, cut), 0.0)
    assert out.measure == pytest.approx(max(0.0, min(iv.hi, cut) - iv.lo), abs=1e-12)


def test_segments_deduplicate_shared_edges():
    s = geo.SegmentSet.from_regions([TRIANGLE_0, TRIANGLE_1])
    assert len(s) == 5
