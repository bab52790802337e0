"""Planar poses and collision primitives.

All collision predicates treat shapes as closed sets: touching counts as
colliding. A small conservative epsilon absorbs floating-point noise so
results are stable under rigid transforms of both operands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = 1e-9


def wrap_angle(theta):
    """Normalize an angle (scalar or array) to the interval (-pi, pi]."""
    out = -np.remainder(-np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) + math.pi
    return float(out) if np.ndim(theta) == 0 else out


@dataclass(frozen=True)
class Pose2:
    """Rigid planar transform: rotation by theta then translation by (x, y)."""

    x: float
    y: float
    theta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @staticmethod
    def from_array(a) -> "Pose2":
        return Pose2(float(a[0]), float(a[1]), wrap_angle(float(a[2])))

    @staticmethod
    def identity() -> "Pose2":
        return Pose2(0.0, 0.0, 0.0)

    def is_identity(self) -> bool:
        return self.x == 0.0 and self.y == 0.0 and self.theta == 0.0


def pose_compose(a: Pose2, b: Pose2) -> Pose2:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return Pose2(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        wrap_angle(a.theta + b.theta),
    )


def pose_inverse(a: Pose2) -> Pose2:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return Pose2(-(c * a.x + s * a.y), -(-s * a.x + c * a.y), wrap_angle(-a.theta))


def pose_apply(a: Pose2, point) -> np.ndarray:
    """Map a point (or (N, 2) array of points) through the pose."""
    p = np.asarray(point, dtype=float)
    c, s = math.cos(a.theta), math.sin(a.theta)
    x = a.x + c * p[..., 0] - s * p[..., 1]
    y = a.y + s * p[..., 0] + c * p[..., 1]
    return np.stack([x, y], axis=-1)


def compose_batch(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Compose pose arrays of shape (..., 3); broadcasting applies."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    c, s = np.cos(pa[..., 2]), np.sin(pa[..., 2])
    out = np.empty(np.broadcast_shapes(pa.shape, pb.shape), dtype=float)
    out[..., 0] = pa[..., 0] + c * pb[..., 0] - s * pb[..., 1]
    out[..., 1] = pa[..., 1] + s * pb[..., 0] + c * pb[..., 1]
    out[..., 2] = wrap_angle(pa[..., 2] + pb[..., 2])
    return out


def inverse_batch(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    c, s = np.cos(p[..., 2]), np.sin(p[..., 2])
    out = np.empty_like(p)
    out[..., 0] = -(c * p[..., 0] + s * p[..., 1])
    out[..., 1] = -(-s * p[..., 0] + c * p[..., 1])
    out[..., 2] = wrap_angle(-p[..., 2])
    return out


@dataclass(frozen=True)
class Circle:
    radius: float


@dataclass(frozen=True)
class AxisBox:
    """Rectangle aligned with its placement frame; half extents along x and y."""

    half_x: float
    half_y: float


@dataclass(frozen=True)
class OrientedBox:
    """Rectangle rotated by a fixed angle relative to its placement frame."""

    half_x: float
    half_y: float
    angle: float


Shape = Circle | AxisBox | OrientedBox


def _box_params(shape: Shape, poses: np.ndarray):
    """Return (half_x, half_y, poses with any fixed box angle folded in)."""
    if isinstance(shape, AxisBox):
        return shape.half_x, shape.half_y, poses
    if isinstance(shape, OrientedBox):
        adj = poses.copy()
        adj[..., 2] = adj[..., 2] + shape.angle
        return shape.half_x, shape.half_y, adj
    raise TypeError(f"not a box shape: {shape!r}")


def _collide_circle_circle(ra, pa, rb, pb):
    d = pa[..., :2] - pb[..., :2]
    lim = ra + rb + EPS
    return np.einsum("...i,...i->...", d, d) <= lim * lim


def _collide_box_circle(shape_box, pb_box, r_circ, p_circ):
    hx, hy, pb = _box_params(shape_box, pb_box)
    d = p_circ[..., :2] - pb[..., :2]
    c, s = np.cos(pb[..., 2]), np.sin(pb[..., 2])
    # circle center in the box frame
    lx = c * d[..., 0] + s * d[..., 1]
    ly = -s * d[..., 0] + c * d[..., 1]
    qx = np.minimum(np.maximum(lx, -hx), hx)
    qy = np.minimum(np.maximum(ly, -hy), hy)
    dx, dy = lx - qx, ly - qy
    lim = r_circ + EPS
    return dx * dx + dy * dy <= lim * lim


def _collide_box_box(shape_a, pa_in, shape_b, pb_in):
    ha_x, ha_y, pa = _box_params(shape_a, pa_in)
    hb_x, hb_y, pb = _box_params(shape_b, pb_in)
    ca, sa = np.cos(pa[..., 2]), np.sin(pa[..., 2])
    cb, sb = np.cos(pb[..., 2]), np.sin(pb[..., 2])
    dx = pb[..., 0] - pa[..., 0]
    dy = pb[..., 1] - pa[..., 1]
    # unit axes of both boxes; each row of (axes_x, axes_y) is a candidate
    # separating axis for the SAT test
    axes_x = np.stack([ca, -sa, cb, -sb])
    axes_y = np.stack([sa, ca, sb, cb])
    # half extents of each box projected onto every candidate axis
    proj_a = ha_x * np.abs(axes_x * ca + axes_y * sa) + ha_y * np.abs(-axes_x * sa + axes_y * ca)
    proj_b = hb_x * np.abs(axes_x * cb + axes_y * sb) + hb_y * np.abs(-axes_x * sb + axes_y * cb)
    center = np.abs(axes_x * dx + axes_y * dy)
    separated = center > proj_a + proj_b + EPS
    return ~np.any(separated, axis=0)


def collide_batch(shape_a: Shape, poses_a, shape_b: Shape, poses_b) -> np.ndarray:
    """Overlap test for one shape pair over arrays of poses.

    poses_a and poses_b are broadcastable arrays of shape (..., 3). Returns a
    boolean array over the broadcast shape; True means the closed shapes
    intersect.
    """
    pa = np.asarray(poses_a, dtype=float)
    pb = np.asarray(poses_b, dtype=float)
    a_circ = isinstance(shape_a, Circle)
    b_circ = isinstance(shape_b, Circle)
    if a_circ and b_circ:
        return _collide_circle_circle(shape_a.radius, pa, shape_b.radius, pb)
    if a_circ:
        return _collide_box_circle(shape_b, pb, shape_a.radius, pa)
    if b_circ:
        return _collide_box_circle(shape_a, pa, shape_b.radius, pb)
    return _collide_box_box(shape_a, pa, shape_b, pb)


def shapes_collide(shape_a: Shape, pose_a: Pose2, shape_b: Shape, pose_b: Pose2) -> bool:
    out = collide_batch(shape_a, pose_a.as_array(), shape_b, pose_b.as_array())
    return bool(out)


def box_corners(shape: Shape, pose: Pose2) -> np.ndarray:
    """World-space corners of a box shape, counterclockwise, shape (4, 2)."""
    hx, hy, p = _box_params(shape, pose.as_array())
    local = np.array([[hx, hy], [-hx, hy], [-hx, -hy], [hx, -hy]])
    return pose_apply(Pose2.from_array(p), local)
