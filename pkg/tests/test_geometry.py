import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from gammareg.core import DimensionMismatch
from gammareg.geometry import (
    ConvexBody,
    LowerHull,
    OutsideHull,
    caratheodory,
    contains,
    convex_hull,
    distance,
    extreme_points,
    hausdorff,
)

from oracles import lp_envelope, project_distance, sampled_hausdorff

coord = st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 3))
pts2 = st.lists(st.tuples(coord, coord), min_size=3, max_size=25).map(np.array)


def test_square_with_interior_points():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.5, 0.0]], dtype=float)
    body = convex_hull(pts)
    assert sorted(body.vertices.tolist()) == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert body.diameter == pytest.approx(np.sqrt(2))


def test_degenerate_hulls():
    assert convex_hull(np.array([[1.0, 1.0]] * 3)).vertices.tolist() == [[1, 1]]
    seg = convex_hull(np.array([[0, 0], [2, 2], [1, 1], [0.5, 0.5]], dtype=float))
    assert seg.vertices.tolist() == [[0, 0], [2, 2]]
    one = convex_hull(np.array([[0.3], [-1.0], [2.0]]))
    assert one.vertices.ravel().tolist() == [-1.0, 2.0]


def test_cube_hull_3d():
    grid = np.stack(np.meshgrid(*[np.linspace(0, 1, 3)] * 3, indexing="ij"), -1).reshape(-1, 3)
    body = convex_hull(grid)
    assert len(body) == 8
    assert distance(body, [2.0, 0.5, 0.5]) == pytest.approx(1.0)
    assert distance(body, [0.5, 0.5, 0.5]) == 0.0
    assert distance(body, [2.0, 2.0, 2.0]) == pytest.approx(np.sqrt(3))
    assert contains(body, [0.5, 0.5, 0.5])


def test_planar_set_in_3d():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.2, 0.2, 0]], dtype=float)
    body = convex_hull(pts)
    assert len(body) == 3
    assert distance(body, [0.2, 0.2, 1.0]) == pytest.approx(1.0)


def test_dim_mismatch_and_empty():
    with pytest.raises(DimensionMismatch):
        convex_hull(np.zeros((3, 2)), dim=3)
    with pytest.raises(ValueError):
        convex_hull(np.zeros((0, 2)))


def test_extreme_points_of_segment():
    body = convex_hull(np.array([[-1.0], [0.0], [1.0]]))
    assert extreme_points(body).points.ravel().tolist() == [-1.0, 1.0]


def test_hausdorff_intervals():
    a = convex_hull(np.array([[-1.0], [1.0]]))
    b = convex_hull(np.array([[-1.01], [1.01]]))
    assert hausdorff(a, b) == pytest.approx(0.01)
    assert hausdorff(a, a) == 0.0


@given(coord, coord, coord, coord)
def test_hausdorff_interval_oracle(a0, a1, b0, b1):
    a = sorted((a0, a1))
    b = sorted((b0, b1))
    ha = convex_hull(np.array([[a[0]], [a[1]]]))
    hb = convex_hull(np.array([[b[0]], [b[1]]]))
    exact = hausdorff(ha, hb)
    assert exact == pytest.approx(max(abs(a[0] - b[0]), abs(a[1] - b[1])), abs=1e-12)
    assert sampled_hausdorff(a, b) <= exact + 1e-9


@given(pts2, pts2)
def test_hausdorff_symmetric_and_vertex_bound(p, q):
    a, b = convex_hull(p), convex_hull(q)
    d = hausdorff(a, b)
    assert d == pytest.approx(hausdorff(b, a), abs=1e-9)
    brute = max(
        max(project_distance(b.vertices, v) for v in a.vertices),
        max(project_distance(a.vertices, v) for v in b.vertices),
    )
    assert d == pytest.approx(brute, abs=1e-6)


@given(pts2)
def test_hull_vertices_are_input_points_and_contain_all(p):
    body = convex_hull(p)
    for v in body.vertices:
        assert np.abs(p - v).max(axis=1).min() == 0.0
    for x in p:
        assert distance(body, x) <= 1e-9


@given(pts2, st.tuples(coord, coord))
def test_distance_matches_projection_oracle(p, x):
    body = convex_hull(p)
    assert distance(body, np.array(x)) == pytest.approx(project_distance(body.vertices, np.array(x)), abs=1e-6)


@given(pts2)
def test_vertex_count_matches_qhull(p):
    try:
        ref = ConvexHull(p)
    except Exception:
        assume(False)
    # qhull may keep nearly collinear points; ours drops them
    assert len(convex_hull(p)) <= len(ref.vertices)
    assert len(convex_hull(p)) >= 3


def test_lower_hull_double_well():
    x = np.linspace(-2, 2, 401)[:, None]
    f = (x[:, 0] ** 2 - 1) ** 2
    hull = LowerHull(x, f)
    assert hull.mode == "line"
    vals = hull.evaluate(np.array([[-0.5], [0.0], [0.7], [1.5]]))
    assert vals[:3].tolist() == [0.0, 0.0, 0.0]
    assert vals[3] == pytest.approx(1.5625)
    ids, w = hull.decompose([0.0])
    assert sorted(x[ids, 0].tolist()) == [-1.0, 1.0]
    assert w.tolist() == [0.5, 0.5]
    assert np.isinf(hull.evaluate(np.array([[3.0]]))[0])


def test_lower_hull_modes():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert LowerHull(pts, pts @ [2.0, -1.0] + 3).mode == "affine"
    assert LowerHull(pts, np.array([0.0, 1.0, 1.0, 0.0])).mode == "plane"
    assert LowerHull(pts[:1], np.array([4.0])).mode == "point"
    with pytest.raises(DimensionMismatch):
        LowerHull(np.zeros((4, 3)), np.zeros(4))


@given(
    st.lists(st.tuples(coord, coord, st.floats(-5, 5, allow_nan=False)), min_size=4, max_size=20),
    st.floats(0, 1),
    st.floats(0, 1),
)
def test_lower_hull_matches_lp_envelope(rows, s, t):
    data = np.array(rows)
    pts, vals = data[:, :2], data[:, 2]
    assume(len({(a, b) for a, b in pts.tolist()}) == len(pts))
    hull = LowerHull(pts, vals)
    # query a convex combination of three data points
    x = (1 - s) * pts[0] + s * ((1 - t) * pts[1] + t * pts[2])
    ref = lp_envelope(pts, vals, x)
    assert hull.evaluate(x[None, :])[0] == pytest.approx(ref, abs=1e-6)


def test_caratheodory_double_well():
    xs = np.linspace(-2, 2, 9)
    support = [(np.array([x]), (x * x - 1) ** 2) for x in xs]
    mu = caratheodory(support, [0.0])
    assert mu.points.ravel().tolist() == [-1.0, 1.0]
    assert mu.weights.tolist() == [0.5, 0.5]
    with pytest.raises(OutsideHull):
        caratheodory(support, [3.0])


@given(
    st.lists(st.tuples(coord, coord, st.floats(-5, 5, allow_nan=False)), min_size=3, max_size=15),
    st.floats(0.05, 0.95),
)
def test_caratheodory_barycenter_and_size(rows, s):
    data = np.array(rows)
    pts, vals = data[:, :2], data[:, 2]
    assume(len({(a, b) for a, b in pts.tolist()}) == len(pts))
    x = (1 - s) * pts[0] + s * pts[-1]
    mu = caratheodory(list(zip(pts, vals)), x)
    assert len(mu.points) <= 3
    assert np.linalg.norm(mu.barycenter() - x) <= 1e-9 * max(1, np.abs(pts).max())
    assert abs(mu.weights.sum() - 1) <= 1e-12
    val = sum(w * vals[np.abs(pts - p).max(axis=1).argmin()] for p, w in mu.support)
    assert val == pytest.approx(lp_envelope(pts, vals, x), abs=1e-6)


def test_convex_body_centroid():
    body = ConvexBody(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert body.centroid().tolist() == [1.0, 0.0]
