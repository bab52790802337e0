from __future__ import annotations

import math

import numpy as np
import pytest

from modeplan.geom2d import (
    AxisBox,
    Circle,
    OrientedBox,
    Pose2,
    box_corners,
    collide_batch,
    compose_batch,
    inverse_batch,
    pose_apply,
    pose_compose,
    pose_inverse,
    shapes_collide,
    wrap_angle,
)


def pose_matrix(p: Pose2) -> np.ndarray:
    c, s = math.cos(p.theta), math.sin(p.theta)
    return np.array([[c, -s, p.x], [s, c, p.y], [0.0, 0.0, 1.0]])


def matrix_pose(m: np.ndarray) -> Pose2:
    return Pose2(m[0, 2], m[1, 2], math.atan2(m[1, 0], m[0, 0]))


def poses_close(a: Pose2, b: Pose2, tol=1e-12) -> bool:
    dth = wrap_angle(a.theta - b.theta)
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol and abs(dth) <= tol


def random_pose(rng, span=5.0) -> Pose2:
    return Pose2(
        float(rng.uniform(-span, span)),
        float(rng.uniform(-span, span)),
        float(rng.uniform(-math.pi, math.pi)),
    )


def test_wrap_angle_halfopen_interval():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(0.0) == 0.0
    vals = wrap_angle(np.linspace(-20, 20, 400))
    assert np.all(vals > -math.pi - 1e-15)
    assert np.all(vals <= math.pi + 1e-15)


def test_pose_compose_matches_matrix_product():
    # oracle: homogeneous 3x3 matrix multiplication
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = random_pose(rng), random_pose(rng)
        got = pose_compose(a, b)
        want = matrix_pose(pose_matrix(a) @ pose_matrix(b))
        assert poses_close(got, want, 1e-11)


def test_pose_inverse_roundtrip():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = random_pose(rng)
        assert poses_close(pose_compose(a, pose_inverse(a)), Pose2.identity(), 1e-11)
        assert poses_close(pose_compose(pose_inverse(a), a), Pose2.identity(), 1e-11)


def test_pose_apply_matches_matrix():
    rng = np.random.default_rng(9)
    for _ in range(50):
        a = random_pose(rng)
        pts = rng.uniform(-3, 3, size=(10, 2))
        hom = np.concatenate([pts, np.ones((10, 1))], axis=1)
        want = (pose_matrix(a) @ hom.T).T[:, :2]
        np.testing.assert_allclose(pose_apply(a, pts), want, atol=1e-12)


def test_batched_compose_and_inverse_match_scalar():
    rng = np.random.default_rng(10)
    pa = np.stack([random_pose(rng).as_array() for _ in range(64)])
    pb = np.stack([random_pose(rng).as_array() for _ in range(64)])
    out = compose_batch(pa, pb)
    inv = inverse_batch(pa)
    for i in range(64):
        want = pose_compose(Pose2.from_array(pa[i]), Pose2.from_array(pb[i]))
        assert poses_close(Pose2.from_array(out[i]), want, 1e-11)
        assert poses_close(Pose2.from_array(inv[i]), pose_inverse(Pose2.from_array(pa[i])), 1e-11)


def test_circle_circle_closed_set():
    a, b = Circle(1.0), Circle(1.0)
    at = Pose2.identity()
    assert shapes_collide(a, at, b, Pose2(1.9, 0, 0))
    assert not shapes_collide(a, at, b, Pose2(2.1, 0, 0))
    # touching exactly counts as collision
    assert shapes_collide(a, at, b, Pose2(2.0, 0, 0))


def test_box_circle_closest_point():
    # closest point on box [-1,1]x[-0.5,0.5] to center (1.4, 0) is (1, 0):
    # distance 0.4 > radius 0.3 -> free
    box = AxisBox(1.0, 0.5)
    assert not shapes_collide(box, Pose2.identity(), Circle(0.3), Pose2(1.4, 0, 0))
    # distance 0.25 < 0.3 -> collide
    assert shapes_collide(box, Pose2.identity(), Circle(0.3), Pose2(1.25, 0, 0))
    # corner case: center (1.3, 0.8), closest corner (1, 0.5),
    # dist = hypot(0.3, 0.3) ~ 0.424
    assert not shapes_collide(box, Pose2.identity(), Circle(0.42), Pose2(1.3, 0.8, 0))
    assert shapes_collide(box, Pose2.identity(), Circle(0.43), Pose2(1.3, 0.8, 0))


def test_circle_inside_box_collides():
    assert shapes_collide(AxisBox(2.0, 2.0), Pose2.identity(), Circle(0.1), Pose2(0.3, -0.4, 0))


def test_oriented_box_is_rotated_axis_box():
    ob = OrientedBox(1.0, 0.2, math.pi / 4)
    ab = AxisBox(1.0, 0.2)
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = random_pose(rng, 2.0)
        circ_at = random_pose(rng, 2.0)
        same = pose_compose(p, Pose2(0, 0, math.pi / 4))
        assert shapes_collide(ob, p, Circle(0.3), circ_at) == shapes_collide(
            ab, same, Circle(0.3), circ_at
        )


# ---------------------------------------------------------------------------
# independent polygon oracle for box-box tests

def _cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _cross2(p4 - p3, p1 - p3)
    d2 = _cross2(p4 - p3, p2 - p3)
    d3 = _cross2(p2 - p1, p3 - p1)
    d4 = _cross2(p2 - p1, p4 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_seg(a, b, c):
        return (
            abs(_cross2(b - a, c - a)) < 1e-12
            and min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12
            and min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12
        )

    return on_seg(p1, p2, p3) or on_seg(p1, p2, p4) or on_seg(p3, p4, p1) or on_seg(p3, p4, p2)


def _point_in_convex(poly: np.ndarray, pt: np.ndarray) -> bool:
    n = len(poly)
    for i in range(n):
        edge = poly[(i + 1) % n] - poly[i]
        if _cross2(edge, pt - poly[i]) < -1e-12:
            return False
    return True


def polygons_collide_oracle(pa: np.ndarray, pb: np.ndarray) -> bool:
    if any(_point_in_convex(pb, v) for v in pa):
        return True
    if any(_point_in_convex(pa, v) for v in pb):
        return True
    for i in range(len(pa)):
        for j in range(len(pb)):
            if _segments_intersect(pa[i], pa[(i + 1) % len(pa)], pb[j], pb[(j + 1) % len(pb)]):
                return True
    return False


def _sat_margin(sa, pa, sb, pb):
    """Largest separation over candidate axes; negative means overlap."""
    corners_a = box_corners(sa, pa)
    corners_b = box_corners(sb, pb)
    best = -math.inf
    for corners in (corners_a, corners_b):
        for i in range(4):
            edge = corners[(i + 1) % 4] - corners[i]
            axis = np.array([-edge[1], edge[0]])
            axis = axis / np.linalg.norm(axis)
            sep = max(
                min(corners_a @ axis) - max(corners_b @ axis),
                min(corners_b @ axis) - max(corners_a @ axis),
            )
            best = max(best, sep)
    return best


def test_box_box_against_polygon_oracle():
    rng = np.random.default_rng(12)
    checked = 0
    for _ in range(400):
        sa = OrientedBox(rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(-3, 3))
        sb = OrientedBox(rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5), rng.uniform(-3, 3))
        pa, pb = random_pose(rng, 2.0), random_pose(rng, 2.0)
        if abs(_sat_margin(sa, pa, sb, pb)) < 1e-7:
            continue  # grazing contact: both sides are tolerance-dependent
        got = shapes_collide(sa, pa, sb, pb)
        want = polygons_collide_oracle(box_corners(sa, pa), box_corners(sb, pb))
        assert got == want
        checked += 1
    assert checked > 300


def test_box_box_touching_edge_collides():
    # two unit boxes side by side, faces exactly touching
    a = AxisBox(0.5, 0.5)
    assert shapes_collide(a, Pose2.identity(), a, Pose2(1.0, 0, 0))
    assert not shapes_collide(a, Pose2.identity(), a, Pose2(1.0 + 1e-6, 0, 0))


def test_collision_invariant_under_rigid_transform():
    rng = np.random.default_rng(13)
    shapes = [Circle(0.5), AxisBox(0.8, 0.3), OrientedBox(0.4, 0.6, 0.7)]
    for _ in range(250):
        sa = shapes[rng.integers(len(shapes))]
        sb = shapes[rng.integers(len(shapes))]
        pa, pb = random_pose(rng, 2.0), random_pose(rng, 2.0)
        t = random_pose(rng, 4.0)
        base = shapes_collide(sa, pa, sb, pb)
        moved = shapes_collide(sa, pose_compose(t, pa), sb, pose_compose(t, pb))
        assert base == moved


def test_collide_batch_broadcasts_static_pose():
    rng = np.random.default_rng(14)
    poses = np.stack([random_pose(rng, 2.0).as_array() for _ in range(40)])
    static = Pose2(0.5, 0.5, 0.3)
    mask = collide_batch(Circle(0.4), poses, AxisBox(0.6, 0.6), static.as_array())
    for i in range(40):
        assert mask[i] == shapes_collide(
            Circle(0.4), Pose2.from_array(poses[i]), AxisBox(0.6, 0.6), static
        )
