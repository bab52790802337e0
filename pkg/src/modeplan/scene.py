"""Scene graph: robots, movable objects, static obstacles, attachments.

The composite configuration stacks every robot's configuration into one flat
vector. Collision checking is batched: all pairwise shape tests are evaluated
with numpy over whole arrays of configurations at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom2d import (
    EPS,
    AxisBox,
    Circle,
    Pose2,
    Shape,
    collide_batch,
    compose_batch,
    pose_compose,
    pose_inverse,
    wrap_angle,
)
from .tasks import (
    WORLD,
    GraspGoal,
    HandoverGoal,
    Mode,
    ObjectPose,
    OrderingGraph,
    PlaceGoal,
    PoseGoal,
    RegionGoal,
    Task,
    TransitionOption,
    activation_child,
)

TOL = 1e-9

DISK = "disk"
DISK_HEADING = "disk_heading"
CHAIN = "chain"


class SceneError(ValueError):
    pass


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class RobotModel:
    """One robot: kinematic kind, joint limits, body shapes, gripper frame.

    Body shapes are attached to link frames. Disk robots have a single link
    at the body frame; chains get one link frame at the start of each link,
    x-axis along the link.
    """

    id: str
    kind: str
    limits: tuple[tuple[float, float], ...]
    bodies: tuple[tuple[int, Shape, Pose2], ...]
    ee_offset: Pose2 = Pose2(0.0, 0.0, 0.0)
    base: Pose2 = Pose2(0.0, 0.0, 0.0)
    link_lengths: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in (DISK, DISK_HEADING, CHAIN):
            raise SceneError(f"unknown robot kind {self.kind!r}")
        if self.kind == CHAIN and not self.link_lengths:
            raise SceneError("chain robot needs link lengths")
        if self.dof != len(self.limits):
            raise SceneError(
                f"robot {self.id}: {len(self.limits)} limit pairs for {self.dof} dof"
            )
        for lo, hi in self.limits:
            if not lo < hi:
                raise SceneError(f"robot {self.id}: empty limit interval ({lo}, {hi})")

    @property
    def dof(self) -> int:
        if self.kind == DISK:
            return 2
        if self.kind == DISK_HEADING:
            return 3
        return len(self.link_lengths)

    @property
    def n_links(self) -> int:
        return len(self.link_lengths) if self.kind == CHAIN else 1

    @property
    def carry_link(self) -> int:
        """Link that carries the gripper; attached objects are exempt from
        collision with this link only."""
        return self.n_links - 1

    def link_poses(self, q: np.ndarray) -> list[np.ndarray]:
        """World pose (N, 3) of every link frame for configs q of shape (N, dof)."""
        q = np.asarray(q, dtype=float)
        n = q.shape[0]
        if self.kind == DISK:
            out = np.zeros((n, 3))
            out[:, :2] = q
            return [out]
        if self.kind == DISK_HEADING:
            return [q.copy()]
        angles = self.base.theta + np.cumsum(q, axis=1)
        poses = []
        x = np.full(n, self.base.x)
        y = np.full(n, self.base.y)
        for k, length in enumerate(self.link_lengths):
            frame = np.stack([x, y, angles[:, k]], axis=1)
            poses.append(frame)
            x = x + length * np.cos(angles[:, k])
            y = y + length * np.sin(angles[:, k])
        return poses

    def ee_poses(self, q: np.ndarray) -> np.ndarray:
        """World gripper pose (N, 3) for configs q of shape (N, dof)."""
        links = self.link_poses(q)
        if self.kind == CHAIN:
            last = links[-1]
            tip = last.copy()
            length = self.link_lengths[-1]
            tip[:, 0] += length * np.cos(last[:, 2])
            tip[:, 1] += length * np.sin(last[:, 2])
            return compose_batch(tip, self.ee_offset.as_array())
        return compose_batch(links[0], self.ee_offset.as_array())

    def config_for_ee(self, ee: Pose2) -> np.ndarray | None:
        """Configuration that places the gripper at the given world pose, or
        None when the kind cannot realize it (chains have no closed form)."""
        body = pose_compose(ee, pose_inverse(self.ee_offset))
        if self.kind == DISK:
            if abs(wrap_angle(body.theta)) > 1e-9:
                return None
            return np.array([body.x, body.y])
        if self.kind == DISK_HEADING:
            return np.array([body.x, body.y, body.theta])
        return None

    def within_limits(self, q: np.ndarray, tol: float = 1e-12) -> bool:
        lim = np.asarray(self.limits, dtype=float)
        return bool(np.all(q >= lim[:, 0] - tol) and np.all(q <= lim[:, 1] + tol))


def disk_robot(
    rid: str,
    radius: float,
    limits,
    ee_offset: Pose2 | None = None,
    heading: bool = False,
) -> RobotModel:
    kind = DISK_HEADING if heading else DISK
    return RobotModel(
        id=rid,
        kind=kind,
        limits=tuple(tuple(p) for p in limits),
        bodies=((0, Circle(radius), Pose2.identity()),),
        ee_offset=ee_offset or Pose2.identity(),
    )


def chain_robot(
    rid: str,
    link_lengths,
    link_width: float,
    base: Pose2,
    limits=None,
    ee_offset: Pose2 | None = None,
) -> RobotModel:
    lengths = tuple(float(v) for v in link_lengths)
    if limits is None:
        limits = tuple((-math.pi, math.pi) for _ in lengths)
    bodies = tuple(
        (k, AxisBox(length / 2.0, link_width / 2.0), Pose2(length / 2.0, 0.0, 0.0))
        for k, length in enumerate(lengths)
    )
    return RobotModel(
        id=rid,
        kind=CHAIN,
        limits=tuple(tuple(p) for p in limits),
        bodies=bodies,
        ee_offset=ee_offset or Pose2.identity(),
        base=base,
        link_lengths=lengths,
    )


@dataclass(frozen=True)
class GraspSpec:
    """One way to hold an object: either a grasp point in the object frame
    with an optional approach heading, or explicit robot configurations."""

    anchor: tuple[float, float] | None = None
    approach: float | None = None
    configs: tuple[tuple[str, tuple[float, ...]], ...] = ()


@dataclass(frozen=True)
class MovableObject:
    id: str
    shape: Shape
    grasps: tuple[GraspSpec, ...] = ()


class SceneGraph:
    """Immutable world description shared by all planners."""

    def __init__(
        self,
        robots: list[RobotModel],
        statics: list[tuple[Shape, Pose2]] = (),
        movables: list[MovableObject] = (),
        bounds: tuple[float, float, float, float] = (-5.0, 5.0, -5.0, 5.0),
        chain_self_collision: bool = False,
    ):
        ids = [r.id for r in robots]
        if len(set(ids)) != len(ids):
            raise SceneError("duplicate robot ids")
        oids = [o.id for o in movables]
        if len(set(oids)) != len(oids):
            raise SceneError("duplicate object ids")
        self.robots = tuple(robots)
        self.statics = tuple(statics)
        self.movables = tuple(movables)
        self.bounds = tuple(float(v) for v in bounds)
        self.chain_self_collision = bool(chain_self_collision)
        self._robot_index = {r.id: i for i, r in enumerate(self.robots)}
        self._movable_index = {o.id: i for i, o in enumerate(self.movables)}
        offsets = np.cumsum([0] + [r.dof for r in self.robots])
        self._offsets = offsets
        self.dim = int(offsets[-1])
        lim = np.zeros((2, self.dim))
        for i, r in enumerate(self.robots):
            arr = np.asarray(r.limits, dtype=float)
            lim[0, offsets[i] : offsets[i + 1]] = arr[:, 0]
            lim[1, offsets[i] : offsets[i + 1]] = arr[:, 1]
        self.limits = lim
        self._static_poses = [
            (shape, pose.as_array()[None, :]) for shape, pose in self.statics
        ]
        # Statics never move, so their geometry is pre-sorted into arrays a
        # moving circle can be tested against in one broadcast call: world
        # axis-aligned boxes as (xlo, xhi, ylo, yhi) rows, circles as
        # (x, y, r) rows.  Anything else stays on the generic pair path.
        aa_rows, circ_rows, generic = [], [], []
        for shape, pose in self.statics:
            if isinstance(shape, Circle):
                circ_rows.append((pose.x, pose.y, shape.radius))
                continue
            angle = pose.theta + getattr(shape, "angle", 0.0)
            hx, hy = shape.half_x, shape.half_y
            if abs(math.sin(angle)) < 1e-12:
                aa_rows.append((pose.x - hx, pose.x + hx, pose.y - hy, pose.y + hy))
            elif abs(math.cos(angle)) < 1e-12:
                aa_rows.append((pose.x - hy, pose.x + hy, pose.y - hx, pose.y + hx))
            else:
                generic.append((shape, pose.as_array()[None, :]))
        self._static_aa = np.array(aa_rows) if aa_rows else None
        self._static_circles = np.array(circ_rows) if circ_rows else None
        self._static_generic = generic
        # Most bodies sit at their link origin; placing those costs nothing.
        self._body_layout = [
            [
                (link, shape, None if rel.is_identity() else rel.as_array())
                for link, shape, rel in r.bodies
            ]
            for r in self.robots
        ]

    # -- composite layout ---------------------------------------------------

    def robot_slice(self, robot: str | int) -> slice:
        i = robot if isinstance(robot, int) else self._robot_index[robot]
        return slice(int(self._offsets[i]), int(self._offsets[i + 1]))

    def robot_id_index(self, rid: str) -> int:
        return self._robot_index[rid]

    def movable_id_index(self, oid: str) -> int:
        return self._movable_index[oid]

    def split(self, q: np.ndarray) -> list[np.ndarray]:
        return [q[..., self.robot_slice(i)] for i in range(len(self.robots))]

    def stack(self, parts) -> np.ndarray:
        return np.concatenate([np.asarray(p, dtype=float) for p in parts], axis=-1)

    def within_limits(self, q: np.ndarray, tol: float = 1e-12) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.limits[0] - tol) and np.all(q <= self.limits[1] + tol))

    # -- kinematics ----------------------------------------------------------

    def ee_pose(self, rid: str, q: np.ndarray) -> Pose2:
        """Gripper pose for one composite configuration."""
        i = self._robot_index[rid]
        qr = np.asarray(q, dtype=float)[None, self.robot_slice(i)]
        return Pose2.from_array(self.robots[i].ee_poses(qr)[0])

    def object_world_pose(self, mode: Mode, q: np.ndarray, obj: str) -> Pose2:
        op = mode.object_pose(obj)
        if op.parent == WORLD:
            return op.rel_pose()
        return pose_compose(self.ee_pose(op.parent, q), op.rel_pose())

    # -- collision checking ---------------------------------------------------

    def _world_bodies(self, Q: np.ndarray, mode: Mode):
        """All movable geometry placed for configs Q: returns
        (robot_bodies, object_bodies) where robot_bodies[i] is a list of
        (link, shape, poses) and object_bodies[j] is (shape, poses, parent
        robot index or None, carry link)."""
        robot_bodies = []
        ee_cache: dict[int, np.ndarray] = {}
        for i, r in enumerate(self.robots):
            qr = Q[:, self.robot_slice(i)]
            links = r.link_poses(qr)
            placed = [
                (link, shape, links[link] if rel is None else compose_batch(links[link], rel))
                for link, shape, rel in self._body_layout[i]
            ]
            robot_bodies.append(placed)
        object_bodies = []
        for op in mode.object_poses:
            j = self._movable_index[op.obj]
            shape = self.movables[j].shape
            rel = np.array([op.x, op.y, op.theta])
            if op.parent == WORLD:
                object_bodies.append((shape, rel[None, :], None, -1))
            else:
                i = self._robot_index[op.parent]
                if i not in ee_cache:
                    ee_cache[i] = self.robots[i].ee_poses(Q[:, self.robot_slice(i)])
                poses = compose_batch(ee_cache[i], rel)
                object_bodies.append((shape, poses, i, self.robots[i].carry_link))
        return robot_bodies, object_bodies

    def _circle_vs_statics(self, radius: float, poses: np.ndarray) -> np.ndarray:
        """Collision mask of one moving circle against every array-backed
        static, all pairs in a couple of broadcast expressions."""
        x, y = poses[..., 0], poses[..., 1]
        mask = np.zeros(x.shape, dtype=bool)
        lim = radius + EPS
        if self._static_aa is not None:
            b = self._static_aa
            qx = np.minimum(np.maximum(x[..., None], b[:, 0]), b[:, 1])
            qy = np.minimum(np.maximum(y[..., None], b[:, 2]), b[:, 3])
            dx = x[..., None] - qx
            dy = y[..., None] - qy
            mask |= np.any(dx * dx + dy * dy <= lim * lim, axis=-1)
        if self._static_circles is not None:
            sc = self._static_circles
            dx = x[..., None] - sc[:, 0]
            dy = y[..., None] - sc[:, 1]
            lim2 = radius + sc[:, 2] + EPS
            mask |= np.any(dx * dx + dy * dy <= lim2 * lim2, axis=-1)
        return mask

    def collision_free_batch(self, Q: np.ndarray, mode: Mode) -> np.ndarray:
        """Boolean mask (N,) of configurations whose posed world is free of
        any robot-robot, robot-object, robot-static, object-object, or
        object-static overlap. Touching counts as collision."""
        Q = np.asarray(Q, dtype=float)
        if Q.ndim == 1:
            Q = Q[None, :]
        n = Q.shape[0]
        robot_bodies, object_bodies = self._world_bodies(Q, mode)
        colliding = np.zeros(n, dtype=bool)

        def hit(shape_a, pa, shape_b, pb) -> bool:
            nonlocal colliding
            mask = collide_batch(shape_a, pa, shape_b, pb)
            colliding = colliding | mask
            return bool(colliding.all())

        def hit_statics(shape_a, pa) -> bool:
            nonlocal colliding
            if isinstance(shape_a, Circle):
                colliding = colliding | self._circle_vs_statics(shape_a.radius, pa)
                if bool(colliding.all()):
                    return True
                pairs = self._static_generic
            else:
                pairs = self._static_poses
            for sb, pb in pairs:
                if hit(shape_a, pa, sb, pb):
                    return True
            return False

        nr = len(self.robots)
        for i in range(nr):
            for _, sa, pa in robot_bodies[i]:
                if hit_statics(sa, pa):
                    return ~colliding
                # robots vs other robots
                for k in range(i + 1, nr):
                    for _, sb, pb in robot_bodies[k]:
                        if hit(sa, pa, sb, pb):
                            return ~colliding
            if self.chain_self_collision and self.robots[i].kind == CHAIN:
                placed = robot_bodies[i]
                for a in range(len(placed)):
                    for b in range(a + 2, len(placed)):  # skip adjacent links
                        if hit(placed[a][1], placed[a][2], placed[b][1], placed[b][2]):
                            return ~colliding
        for j, (so, po, parent, carry) in enumerate(object_bodies):
            for i in range(nr):
                for link, sa, pa in robot_bodies[i]:
                    if parent == i and link == carry:
                        continue  # held object never collides with its carrying link
                    if hit(sa, pa, so, po):
                        return ~colliding
            if hit_statics(so, po):
                return ~colliding
            for so2, po2, _, _ in object_bodies[j + 1 :]:
                if hit(so, po, so2, po2):
                    return ~colliding
        return ~colliding

    def world_collision_free(self, q: np.ndarray, mode: Mode) -> bool:
        return bool(self.collision_free_batch(np.asarray(q, dtype=float)[None, :], mode)[0])

    # -- goal constraints ------------------------------------------------------

    def task_executors(self, task: Task, mode: Mode, ordering: OrderingGraph) -> list[str]:
        """Robots that must satisfy the task's constraint, resolved against
        the mode for pool tasks."""
        if task.pool:
            assigned = [
                r for r, a in zip(ordering.robots, mode.assignment) if a == task.id
            ]
            if len(assigned) != 1:
                raise TransitionError(
                    f"pool task {task.id} needs exactly one assigned robot, got {assigned}"
                )
            return assigned
        if isinstance(task.goal, HandoverGoal):
            return [task.goal.giver, task.goal.receiver]
        return list(task.robots)

    def constraint_satisfied(
        self, task: Task, mode: Mode, q: np.ndarray, ordering: OrderingGraph, tol: float = TOL
    ) -> bool:
        goal = task.goal
        q = np.asarray(q, dtype=float)
        if isinstance(goal, PoseGoal):
            for rid, cfg in goal.configs:
                if np.max(np.abs(q[self.robot_slice(rid)] - np.asarray(cfg))) > tol:
                    return False
            return True
        if isinstance(goal, RegionGoal):
            for rid, box in goal.boxes:
                qr = q[self.robot_slice(rid)]
                for v, (lo, hi) in zip(qr, box):
                    if v < lo - tol or v > hi + tol:
                        return False
            return True
        if isinstance(goal, GraspGoal):
            if mode.object_parent(goal.obj) != WORLD:
                return False
            executor = self.task_executors(task, mode, ordering)[0]
            obj_pose = self.object_world_pose(mode, q, goal.obj)
            ee = self.ee_pose(executor, q)
            qr = q[self.robot_slice(executor)]
            for spec in self.movables[self._movable_index[goal.obj]].grasps:
                if spec.configs:
                    for rid, cfg in spec.configs:
                        if rid == executor and np.max(np.abs(qr - np.asarray(cfg))) <= tol:
                            return True
                    continue
                ax, ay = spec.anchor
                c, s = math.cos(obj_pose.theta), math.sin(obj_pose.theta)
                wx = obj_pose.x + c * ax - s * ay
                wy = obj_pose.y + s * ax + c * ay
                if math.hypot(ee.x - wx, ee.y - wy) > tol:
                    continue
                if spec.approach is not None:
                    want = wrap_angle(obj_pose.theta + spec.approach)
                    if abs(wrap_angle(ee.theta - want)) > tol:
                        continue
                return True
            return False
        if isinstance(goal, PlaceGoal):
            if mode.object_parent(goal.obj) != self.task_executors(task, mode, ordering)[0]:
                return False
            world = self.object_world_pose(mode, q, goal.obj)
            tx, ty, tth = goal.pose
            return (
                abs(world.x - tx) <= tol
                and abs(world.y - ty) <= tol
                and abs(wrap_angle(world.theta - tth)) <= tol
            )
        if isinstance(goal, HandoverGoal):
            if mode.object_parent(goal.obj) != goal.giver:
                return False
            ee_g = self.ee_pose(goal.giver, q)
            ee_r = self.ee_pose(goal.receiver, q)
            if math.hypot(ee_g.x - ee_r.x, ee_g.y - ee_r.y) > tol:
                return False
            if goal.region is not None:
                (xlo, xhi), (ylo, yhi) = goal.region
                if not (xlo - tol <= ee_g.x <= xhi + tol and ylo - tol <= ee_g.y <= yhi + tol):
                    return False
            return True
        raise TypeError(f"unknown goal {goal!r}")

    def _config_for_ee(self, rid: str, ee: Pose2) -> np.ndarray | None:
        robot = self.robots[self._robot_index[rid]]
        cfg = robot.config_for_ee(ee)
        if cfg is None or not robot.within_limits(cfg):
            return None
        return cfg

    def constraint_sample(
        self,
        task: Task,
        mode: Mode,
        q_base: np.ndarray,
        ordering: OrderingGraph,
        rng: np.random.Generator,
    ) -> np.ndarray | None:
        """One configuration satisfying the task's goal, with unconstrained
        robots left at q_base values. Returns None when the draw fails."""
        goal = task.goal
        q = np.array(q_base, dtype=float)
        if isinstance(goal, PoseGoal):
            for rid, cfg in goal.configs:
                q[self.robot_slice(rid)] = cfg
            return q
        if isinstance(goal, RegionGoal):
            for rid, box in goal.boxes:
                arr = np.asarray(box, dtype=float)
                q[self.robot_slice(rid)] = rng.uniform(arr[:, 0], arr[:, 1])
            return q
        if isinstance(goal, GraspGoal):
            if mode.object_parent(goal.obj) != WORLD:
                return None
            executor = self.task_executors(task, mode, ordering)[0]
            robot = self.robots[self._robot_index[executor]]
            obj_pose = mode.object_pose(goal.obj).rel_pose()  # world parent
            grasps = self.movables[self._movable_index[goal.obj]].grasps
            if not grasps:
                return None
            spec = grasps[int(rng.integers(len(grasps)))]
            if spec.configs:
                cfgs = [c for rid, c in spec.configs if rid == executor]
                if not cfgs:
                    return None
                cfg = np.asarray(cfgs[0], dtype=float)
                if not robot.within_limits(cfg):
                    return None
                q[self.robot_slice(executor)] = cfg
                return q
            ax, ay = spec.anchor
            anchor_world = np.array(
                [
                    obj_pose.x + math.cos(obj_pose.theta) * ax - math.sin(obj_pose.theta) * ay,
                    obj_pose.y + math.sin(obj_pose.theta) * ax + math.cos(obj_pose.theta) * ay,
                ]
            )
            if spec.approach is not None:
                theta = wrap_angle(obj_pose.theta + spec.approach)
            elif robot.kind == DISK_HEADING:
                lo, hi = robot.limits[2]
                theta = float(rng.uniform(lo, hi))
            else:
                theta = self.robots[self._robot_index[executor]].ee_offset.theta
            cfg = self._config_for_ee(executor, Pose2(anchor_world[0], anchor_world[1], theta))
            if cfg is None:
                return None
            q[self.robot_slice(executor)] = cfg
            return q
        if isinstance(goal, PlaceGoal):
            executor = self.task_executors(task, mode, ordering)[0]
            if mode.object_parent(goal.obj) != executor:
                return None
            rel = mode.object_pose(goal.obj).rel_pose()
            target = Pose2(*goal.pose)
            ee = pose_compose(target, pose_inverse(rel))
            cfg = self._config_for_ee(executor, ee)
            if cfg is None:
                return None
            q[self.robot_slice(executor)] = cfg
            return q
        if isinstance(goal, HandoverGoal):
            if mode.object_parent(goal.obj) != goal.giver:
                return None
            if goal.region is not None:
                (xlo, xhi), (ylo, yhi) = goal.region
            else:
                xlo, xhi, ylo, yhi = self.bounds
            point = np.array([rng.uniform(xlo, xhi), rng.uniform(ylo, yhi)])
            for rid in (goal.giver, goal.receiver):
                robot = self.robots[self._robot_index[rid]]
                if robot.kind == DISK_HEADING:
                    lo, hi = robot.limits[2]
                    theta = float(rng.uniform(lo, hi))
                else:
                    theta = robot.ee_offset.theta
                cfg = self._config_for_ee(rid, Pose2(point[0], point[1], theta))
                if cfg is None:
                    return None
                q[self.robot_slice(rid)] = cfg
            return q
        raise TypeError(f"unknown goal {goal!r}")

    # -- transitions -----------------------------------------------------------

    def apply_post_conditions(
        self,
        ordering: OrderingGraph,
        mode: Mode,
        option: TransitionOption,
        q: np.ndarray,
    ) -> Mode:
        """Successor mode after completing option.completed_task at config q.

        Grasped objects are reparented with relative poses computed from the
        gripper pose at q, so the object's world pose is continuous across
        the transition.
        """
        if option.completed_task is None:
            return activation_child(mode, option)
        task = self.ordering_task(ordering, option.completed_task)
        if not self.constraint_satisfied(task, mode, q, ordering):
            raise TransitionError(
                f"config does not satisfy constraint of task {task.id!r}"
            )
        kind = task.post_kind
        poses = mode.object_poses
        if kind == "grasp":
            executor = self.task_executors(task, mode, ordering)[0]
            world = self.object_world_pose(mode, q, task.goal.obj)
            rel = pose_compose(pose_inverse(self.ee_pose(executor, q)), world)
            poses = mode.replace_object(task.goal.obj, executor, rel)
        elif kind == "place":
            world = self.object_world_pose(mode, q, task.goal.obj)
            poses = mode.replace_object(task.goal.obj, WORLD, world)
        elif kind == "handover":
            world = self.object_world_pose(mode, q, task.goal.obj)
            rel = pose_compose(pose_inverse(self.ee_pose(task.goal.receiver, q)), world)
            poses = mode.replace_object(task.goal.obj, task.goal.receiver, rel)
        return Mode(option.assignment, mode.completed | {task.id}, poses)

    @staticmethod
    def ordering_task(ordering: OrderingGraph, tid: str) -> Task:
        return ordering.task(tid)

    def initial_object_poses(
        self, placements: dict[str, Pose2 | tuple[float, float, float]]
    ) -> tuple[ObjectPose, ...]:
        out = []
        for o in self.movables:
            pose = placements[o.id]
            if not isinstance(pose, Pose2):
                pose = Pose2(*pose)
            out.append(ObjectPose(o.id, WORLD, pose.x, pose.y, pose.theta))
        return tuple(out)
