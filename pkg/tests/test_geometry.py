import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualclip.geometry import (Branch, ClipResult, ConvexPolygon, ConvexPolyhedron, LineRep, Plane, Segment,
                               bounding_box, eps_geom, finish_interval, project_point, rhomb_bound, to_semidual)
from dualclip.workload import gen_convex_polygon

coord = st.floats(-100, 100, allow_nan=False)


def test_to_semidual_horizontal():
    assert to_semidual((-5, 0), (5, 0)) == LineRep(Branch.KQ, 0.0, 0.0)


def test_to_semidual_vertical():
    assert to_semidual((0, -5), (0, 5)) == LineRep(Branch.MP, 0.0, 0.0)


def test_to_semidual_steep_goes_mp():
    assert to_semidual((0, 0), (1, 2)) == LineRep(Branch.MP, 0.5, 0.0)


def test_to_semidual_diagonal_tie_is_kq():
    rep = to_semidual((0, 0), (1, -1))
    assert rep.branch is Branch.KQ and rep.slope == -1.0


def test_to_semidual_zero_length():
    with pytest.raises(ValueError, match="zero-length segment"):
        to_semidual((1, 2), (1, 2))


@given(coord, coord, coord, coord, st.floats(-3, 3))
def test_to_semidual_roundtrip(x0, y0, x1, y1, t):
    if (x0, y0) == (x1, y1):
        return
    rep = to_semidual((x0, y0), (x1, y1))
    assert abs(rep.slope) <= 1.0
    px, py = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
    scale = 1 + abs(px) + abs(py) + abs(rep.intercept)
    assert abs(rep.residual(px, py)) <= 1e-9 * scale * 10


def test_line_rep_rejects_steep():
    with pytest.raises(ValueError):
        LineRep(Branch.KQ, 1.5, 0.0)


def test_bounding_box_square(square):
    box = bounding_box(square)
    assert box.center == (0.0, 0.0) and box.half_x == 1.0 and box.half_y == 1.0 and box.h == 2.0


def test_bounding_box_triangle():
    box = bounding_box(ConvexPolygon(np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 2.0]])))
    assert box.center == (2.0, 1.0) and box.half_x == 2.0 and box.half_y == 1.0 and box.h == 3.0


def test_bounding_box_contains_vertices():
    for seed in range(20):
        poly = gen_convex_polygon(9, seed)
        box = bounding_box(poly)
        eps = eps_geom(poly.diameter)
        rel = np.abs(poly.vertices - np.asarray(box.center))
        assert np.all(rel[:, 0] <= box.half_x + eps) and np.all(rel[:, 1] <= box.half_y + eps)


def test_intercept_bound_rectangle_lines():
    # |q| > h implies the line misses the box; for unit slopes the bound is tight
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.uniform(0.2, 3.0, 2)
        h = a + b
        k = rng.uniform(-1, 1, 10_000)
        q = rng.uniform(-2 * h, 2 * h, 10_000)
        hits = np.abs(q) <= b + np.abs(k) * a  # exact rectangle test for |k| <= 1
        assert not np.any(hits & (np.abs(q) > h + eps_geom(2 * h)))
        k1 = np.sign(k)
        assert np.array_equal(np.abs(q) <= b + np.abs(k1) * a, np.abs(q) <= h)


def test_rhomb_bound_not_larger_than_box_h():
    for seed in range(20):
        poly = gen_convex_polygon(7, seed)
        box = bounding_box(poly)
        assert rhomb_bound(poly.vertices, box.center) <= box.h + 1e-12


@pytest.mark.parametrize("plane,expected", [(Plane.XY, (1, 2)), (Plane.XZ, (1, 3)), (Plane.YZ, (2, 3))])
def test_project_point(plane, expected):
    assert project_point((1, 2, 3), plane) == expected


def test_grid_numbering():
    nums = [p.grid_number(b) for p in Plane for b in (Branch.KQ, Branch.MP)]
    assert nums == [1, 2, 3, 4, 5, 6]


def test_polygon_validation():
    with pytest.raises(ValueError):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):  # clockwise
        ConvexPolygon(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):  # collinear vertex
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):  # pentagram winds twice
        ang = 4 * np.pi * np.arange(5) / 5
        ConvexPolygon(np.column_stack([np.cos(ang), np.sin(ang)]))


def test_polyhedron_normals_outward(cube, tetra):
    for poly in (cube, tetra):
        c = poly.vertices.mean(axis=0)
        for f, n in zip(poly.facets, poly.normals):
            assert np.dot(n, poly.vertices[f[0]] - c) > 0
            assert math.isclose(np.linalg.norm(n), 1.0)


def test_polyhedron_validation(cube):
    with pytest.raises(ValueError):  # flipped facet
        f = cube.facets.copy()
        f[0] = f[0][::-1]
        ConvexPolyhedron(cube.vertices, f)
    with pytest.raises(ValueError):  # open surface
        ConvexPolyhedron(cube.vertices, cube.facets[:-1])


def test_segment_rejects_zero_length():
    with pytest.raises(ValueError, match="zero-length segment"):
        Segment((1, 1, 1), (1, 1, 1))


def test_finish_interval():
    assert finish_interval(-0.5, 0.5) == ClipResult.interval(0.0, 0.5)
    assert finish_interval(1.2, 1.5).is_empty
    assert finish_interval(0.3, 0.2).is_empty
    r = finish_interval(0.4, 0.4)
    assert r.t_enter == r.t_exit == 0.4


def test_clip_result_endpoints():
    seg = Segment((-2, 0), (2, 0))
    assert ClipResult.interval(0.25, 0.75).endpoints(seg) == ((-1.0, 0.0), (1.0, 0.0))
    assert ClipResult.empty().endpoints(seg) is None
    with pytest.raises(ValueError):
        ClipResult.interval(0.6, 0.5)
