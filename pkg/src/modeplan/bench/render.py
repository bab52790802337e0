"""Plain-SVG rendering of scenarios and planned paths.

No plotting dependency: the output is a small hand-assembled SVG document.
Obstacles come out gray, movable objects slate blue, goal regions dashed.
Each robot's trace is drawn as short segments colored by progress along
the path, dark purple at the start fading to yellow at the end, so
crossings and waiting patterns are readable without animation.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..geom2d import AxisBox, Circle, OrientedBox, Pose2
from ..scene import CHAIN
from ..tasks import HandoverGoal, PlaceGoal, PoseGoal, RegionGoal
from .scenario import Scenario

_TRACE_START = (68, 1, 84)
_TRACE_END = (253, 231, 37)


def _lerp_color(f: float) -> str:
    f = min(max(f, 0.0), 1.0)
    rgb = [round(a + (b - a) * f) for a, b in zip(_TRACE_START, _TRACE_END)]
    return "#%02x%02x%02x" % tuple(rgb)


class _Canvas:
    """World-to-screen mapping with the y axis flipped for SVG."""

    def __init__(self, bounds, width):
        xmin, xmax, ymin, ymax = bounds
        pad = 0.05 * max(xmax - xmin, ymax - ymin)
        self.xmin, self.ymax = xmin - pad, ymax + pad
        self.scale = width / (xmax - xmin + 2 * pad)
        self.width = width
        self.height = self.scale * (ymax - ymin + 2 * pad)

    def pt(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.xmin) * self.scale, (self.ymax - y) * self.scale

    def fmt(self, x: float, y: float) -> str:
        sx, sy = self.pt(x, y)
        return f"{sx:.2f},{sy:.2f}"


def _shape_svg(canvas, shape, pose: Pose2, style: str) -> str:
    sx, sy = canvas.pt(pose.x, pose.y)
    if isinstance(shape, Circle):
        r = shape.radius * canvas.scale
        return f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="{r:.2f}" {style}/>'
    if isinstance(shape, (AxisBox, OrientedBox)):
        hx = shape.half_x * canvas.scale
        hy = shape.half_y * canvas.scale
        theta = pose.theta + (shape.angle if isinstance(shape, OrientedBox) else 0.0)
        deg = -np.degrees(theta)  # screen y is flipped, so rotation flips too
        rect = (
            f'<rect x="{sx - hx:.2f}" y="{sy - hy:.2f}" '
            f'width="{2 * hx:.2f}" height="{2 * hy:.2f}" {style}'
        )
        if abs(deg) > 1e-9:
            rect += f' transform="rotate({deg:.3f} {sx:.2f} {sy:.2f})"'
        return rect + "/>"
    raise TypeError(f"cannot render shape {type(shape).__name__}")


def _region_svg(canvas, box, style: str) -> str:
    (xlo, xhi), (ylo, yhi) = box[0], box[1]
    x0, y0 = canvas.pt(xlo, yhi)
    x1, y1 = canvas.pt(xhi, ylo)
    return (
        f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" '
        f'height="{y1 - y0:.2f}" {style}/>'
    )


def _goal_marks(canvas, scenario: Scenario) -> list[str]:
    marks = []
    cross = 'stroke="#c0392b" stroke-width="1.5" fill="none"'
    dashed = 'stroke="#2e86ab" stroke-width="1" fill="none" stroke-dasharray="4 3"'
    for task in scenario.ordering.tasks:
        goal = task.goal
        if isinstance(goal, PoseGoal):
            for _, cfg in goal.configs:
                sx, sy = canvas.pt(cfg[0], cfg[1])
                d = 4.0
                marks.append(
                    f'<path d="M {sx - d:.2f} {sy - d:.2f} L {sx + d:.2f} {sy + d:.2f} '
                    f'M {sx - d:.2f} {sy + d:.2f} L {sx + d:.2f} {sy - d:.2f}" {cross}/>'
                )
        elif isinstance(goal, RegionGoal):
            for _, box in goal.boxes:
                marks.append(_region_svg(canvas, box[:2], dashed))
        elif isinstance(goal, PlaceGoal):
            sx, sy = canvas.pt(goal.pose[0], goal.pose[1])
            d = 4.5
            marks.append(
                f'<path d="M {sx:.2f} {sy - d:.2f} L {sx + d:.2f} {sy:.2f} '
                f'L {sx:.2f} {sy + d:.2f} L {sx - d:.2f} {sy:.2f} Z" {cross}/>'
            )
        elif isinstance(goal, HandoverGoal) and goal.region is not None:
            marks.append(_region_svg(canvas, goal.region, dashed))
    return marks


def _robot_point(robot, q: np.ndarray) -> tuple[float, float]:
    """Reference point to trace: body center, or gripper for fixed-base arms."""
    if robot.kind == CHAIN:
        pose = robot.ee_poses(q[None, :])[0]
        return float(pose[0]), float(pose[1])
    return float(q[0]), float(q[1])


def render_path_svg(
    scenario: Scenario,
    times=None,
    configs=None,
    out: str | Path | None = None,
    width: int = 640,
) -> str:
    """SVG picture of the scenario, with the path traced when one is given.

    ``times``/``configs`` are parallel: waypoint timestamps and composite
    configurations, as stored by the benchmark runner.  Omit both to draw
    the scene alone.
    """
    scene = scenario.scene
    canvas = _Canvas(scene.bounds, width)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width:.0f}" '
        f'height="{canvas.height:.0f}" viewBox="0 0 {canvas.width:.2f} '
        f'{canvas.height:.2f}">',
        f"<title>{escape(scenario.name)}</title>",
        f'<rect width="{canvas.width:.2f}" height="{canvas.height:.2f}" fill="#fafafa"/>',
    ]
    for shape, pose in scene.statics:
        parts.append(_shape_svg(canvas, shape, pose, 'fill="#888888"'))
    poses = {op.obj: op for op in scenario.start.mode.object_poses}
    for obj in scene.movables:
        op = poses[obj.id]
        parts.append(
            _shape_svg(
                canvas, obj.shape, Pose2(op.x, op.y, op.theta), 'fill="#5d6d9e"'
            )
        )
    parts.extend(_goal_marks(canvas, scenario))
    if configs is not None and len(configs):
        Q = np.asarray(configs, dtype=float)
        ts = np.asarray(times, dtype=float)
        span = max(float(ts[-1] - ts[0]), 1e-12)
        for i, robot in enumerate(scene.robots):
            sl = scene.robot_slice(i)
            pts = [_robot_point(robot, Q[k, sl]) for k in range(Q.shape[0])]
            for k in range(len(pts) - 1):
                f = (0.5 * (ts[k] + ts[k + 1]) - ts[0]) / span
                a = canvas.fmt(*pts[k])
                b = canvas.fmt(*pts[k + 1])
                parts.append(
                    f'<polyline points="{a} {b}" fill="none" '
                    f'stroke="{_lerp_color(f)}" stroke-width="2" '
                    'stroke-linecap="round"/>'
                )
            body = robot.bodies[0][1]
            for q, op in ((Q[0, sl], 0.35), (Q[-1, sl], 0.8)):
                x, y = _robot_point(robot, q)
                if isinstance(body, Circle):
                    sx, sy = canvas.pt(x, y)
                    r = body.radius * canvas.scale
                    parts.append(
                        f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="{r:.2f}" '
                        f'fill="#3a7d44" fill-opacity="{op}"/>'
                    )
    parts.append("</svg>")
    text = "\n".join(parts)
    if out is not None:
        Path(out).write_text(text)
    return text
