from __future__ import annotations

import math

import numpy as np
import pytest

from modeplan.geom2d import AxisBox, Circle, Pose2, pose_compose, shapes_collide, wrap_angle
from modeplan.scene import (
    GraspSpec,
    MovableObject,
    SceneGraph,
    TransitionError,
    chain_robot,
    disk_robot,
)
from modeplan.tasks import (
    GraspGoal,
    HandoverGoal,
    Mode,
    ObjectPose,
    OrderingGraph,
    PlaceGoal,
    PoseGoal,
    Task,
    TransitionOption,
)

XY = [(-5.0, 5.0), (-5.0, 5.0)]
XYT = XY + [(-math.pi, math.pi)]


def chain_fk_oracle(base: Pose2, lengths, q):
    """Independent FK via complex arithmetic."""
    z = complex(base.x, base.y)
    ang = base.theta
    for length, joint in zip(lengths, q):
        ang += joint
        z += length * complex(math.cos(ang), math.sin(ang))
    return z.real, z.imag, wrap_angle(ang)


def test_chain_fk_right_angle():
    # lengths (1, 1), q = (pi/2, -pi/2): tip at (1, 1) facing +x
    r = chain_robot("arm", [1.0, 1.0], 0.1, Pose2.identity())
    ee = r.ee_poses(np.array([[math.pi / 2, -math.pi / 2]]))[0]
    np.testing.assert_allclose(ee, [1.0, 1.0, 0.0], atol=1e-12)


def test_chain_fk_matches_complex_oracle():
    rng = np.random.default_rng(21)
    base = Pose2(0.3, -0.2, 0.4)
    lengths = [0.7, 0.5, 0.9]
    r = chain_robot("arm", lengths, 0.1, base)
    for _ in range(100):
        q = rng.uniform(-math.pi, math.pi, size=3)
        ee = r.ee_poses(q[None, :])[0]
        want = chain_fk_oracle(base, lengths, q)
        np.testing.assert_allclose(ee[:2], want[:2], atol=1e-12)
        assert abs(wrap_angle(ee[2] - want[2])) < 1e-12


def test_disk_ee_offset():
    r = disk_robot("d", 0.3, XYT, ee_offset=Pose2(0.4, 0.0, 0.0), heading=True)
    ee = r.ee_poses(np.array([[1.0, 2.0, math.pi / 2]]))[0]
    np.testing.assert_allclose(ee, [1.0, 2.4, math.pi / 2], atol=1e-12)
    cfg = r.config_for_ee(Pose2(1.0, 2.4, math.pi / 2))
    np.testing.assert_allclose(cfg, [1.0, 2.0, math.pi / 2], atol=1e-12)


def simple_scene(**kw):
    r1 = disk_robot("r1", 0.3, XY)
    r2 = disk_robot("r2", 0.3, XY)
    statics = [(AxisBox(0.2, 1.0), Pose2(0.0, 0.0, 0.0))]
    return SceneGraph([r1, r2], statics=statics, **kw)


def no_object_mode(scene, assignment=("t", "t")):
    return Mode(tuple(assignment), frozenset(), ())


def test_collision_free_batch_matches_pairwise_oracle():
    scene = simple_scene()
    mode = no_object_mode(scene)
    rng = np.random.default_rng(22)
    Q = rng.uniform(-2.5, 2.5, size=(300, 4))
    got = scene.collision_free_batch(Q, mode)
    box, box_pose = scene.statics[0]
    for i in range(300):
        p1 = Pose2(Q[i, 0], Q[i, 1], 0.0)
        p2 = Pose2(Q[i, 2], Q[i, 3], 0.0)
        collide = (
            shapes_collide(Circle(0.3), p1, Circle(0.3), p2)
            or shapes_collide(Circle(0.3), p1, box, box_pose)
            or shapes_collide(Circle(0.3), p2, box, box_pose)
        )
        assert got[i] == (not collide)


def test_collision_static_layouts_match_pairwise_oracle():
    """Every static layout class: axis-aligned box, quarter-turn box (extents
    swap), genuinely rotated box, and a circle."""
    statics = [
        (AxisBox(0.4, 0.15), Pose2(1.0, 0.5, 0.0)),
        (AxisBox(0.4, 0.15), Pose2(-1.0, 0.5, math.pi / 2)),
        (AxisBox(0.3, 0.3), Pose2(0.0, -1.2, 0.7)),
        (Circle(0.5), Pose2(2.0, -2.0, 0.0)),
    ]
    scene = SceneGraph([disk_robot("r1", 0.25, XY)], statics=statics)
    mode = Mode(("t",), frozenset(), ())
    rng = np.random.default_rng(7)
    Q = rng.uniform(-3.0, 3.0, size=(500, 2))
    got = scene.collision_free_batch(Q, mode)
    for i in range(500):
        p = Pose2(Q[i, 0], Q[i, 1], 0.0)
        collide = any(shapes_collide(Circle(0.25), p, s, sp) for s, sp in statics)
        assert got[i] == (not collide)


def test_attached_object_carrier_exemption():
    r1 = disk_robot("r1", 0.3, XY)
    r2 = disk_robot("r2", 0.3, XY)
    obj = MovableObject("o1", Circle(0.2))
    scene = SceneGraph([r1, r2], movables=[obj])
    # object attached to r1 overlapping r1's own body: exempt
    attached = Mode(("t", "t"), frozenset(), (ObjectPose("o1", "r1", 0.1, 0.0, 0.0),))
    q = np.array([0.0, 0.0, 3.0, 3.0])
    assert scene.world_collision_free(q, attached)
    # same geometry but parked in the world at r1's position: collides
    parked = Mode(("t", "t"), frozenset(), (ObjectPose("o1", "world", 0.1, 0.0, 0.0),))
    assert not scene.world_collision_free(q, parked)
    # attached object still collides with the other robot
    q2 = np.array([0.0, 0.0, 0.35, 0.0])
    assert not scene.world_collision_free(q2, attached)


def test_attached_object_collides_with_non_carrying_link():
    # 2-link chain folded back: object on the gripper overlaps link 0
    arm = chain_robot("arm", [1.0, 1.0], 0.2, Pose2.identity())
    obj = MovableObject("o1", Circle(0.15))
    scene = SceneGraph([arm], movables=[obj])
    q = np.array([0.0, math.pi - 1e-2])  # tip nearly back at the base
    attached = Mode(("t",), frozenset(), (ObjectPose("o1", "arm", 0.0, 0.0, 0.0),))
    assert not scene.world_collision_free(q, attached)
    # stretched out: free
    assert scene.world_collision_free(np.array([0.0, 0.0]), attached)


def manipulation_setup():
    ee = Pose2(0.5, 0.0, 0.0)
    r1 = disk_robot("r1", 0.3, XYT, ee_offset=ee, heading=True)
    r2 = disk_robot("r2", 0.3, XYT, ee_offset=ee, heading=True)
    obj = MovableObject("o1", Circle(0.1), grasps=(GraspSpec(anchor=(0.0, 0.0), approach=0.0),))
    scene = SceneGraph([r1, r2], movables=[obj], bounds=(-5, 5, -5, 5))
    tasks = (
        Task("g", ("r1",), GraspGoal("o1")),
        Task("h", ("r1", "r2"), HandoverGoal("o1", "r1", "r2")),
        Task("p", ("r2",), PlaceGoal("o1", (2.0, 2.0, 0.0))),
        Task(
            "fin",
            ("r1", "r2"),
            PoseGoal((("r1", (-1.0, 0.0, 0.0)), ("r2", (1.0, 0.0, 0.0)))),
        ),
    )
    ordering = OrderingGraph(
        ("r1", "r2"), tasks, (("g", "h"), ("h", "p"), ("p", "fin")), "fin"
    )
    start = Mode(("g", None), frozenset(), (ObjectPose("o1", "world", 1.0, 1.0, 0.5),))
    return scene, ordering, start


def test_grasp_sample_and_world_pose_continuity():
    scene, ordering, start = manipulation_setup()
    rng = np.random.default_rng(23)
    task = ordering.task("g")
    q = scene.constraint_sample(task, start, np.zeros(6), ordering, rng)
    assert q is not None
    assert scene.constraint_satisfied(task, start, q, ordering)
    # gripper point sits exactly on the grasp anchor (the object center)
    ee = scene.ee_pose("r1", q)
    assert math.hypot(ee.x - 1.0, ee.y - 1.0) < 1e-9

    before = scene.object_world_pose(start, q, "o1")
    child = scene.apply_post_conditions(
        ordering, start, TransitionOption("g", ("h", "h")), q
    )
    assert child.object_parent("o1") == "r1"
    after = scene.object_world_pose(child, q, "o1")
    assert math.hypot(after.x - before.x, after.y - before.y) < 1e-9
    assert abs(wrap_angle(after.theta - before.theta)) < 1e-9


def test_place_sample_hits_target_exactly():
    scene, ordering, start = manipulation_setup()
    rng = np.random.default_rng(24)
    # grasp first so the object rides r1, then hand over to r2
    qg = scene.constraint_sample(ordering.task("g"), start, np.zeros(6), ordering, rng)
    m1 = scene.apply_post_conditions(ordering, start, TransitionOption("g", ("h", "h")), qg)
    qh = scene.constraint_sample(ordering.task("h"), m1, qg, ordering, rng)
    assert qh is not None
    assert scene.constraint_satisfied(ordering.task("h"), m1, qh, ordering)
    before = scene.object_world_pose(m1, qh, "o1")
    m2 = scene.apply_post_conditions(ordering, m1, TransitionOption("h", (None, "p")), qh)
    after = scene.object_world_pose(m2, qh, "o1")
    assert math.hypot(after.x - before.x, after.y - before.y) < 1e-9
    assert m2.object_parent("o1") == "r2"

    qp = scene.constraint_sample(ordering.task("p"), m2, qh, ordering, rng)
    assert qp is not None
    world = scene.object_world_pose(m2, qp, "o1")
    assert abs(world.x - 2.0) < 1e-9 and abs(world.y - 2.0) < 1e-9
    assert abs(wrap_angle(world.theta)) < 1e-9
    m3 = scene.apply_post_conditions(ordering, m2, TransitionOption("p", (None, "fin")), qp)
    assert m3.object_parent("o1") == "world"


def test_handover_grippers_coincide():
    scene, ordering, start = manipulation_setup()
    rng = np.random.default_rng(25)
    qg = scene.constraint_sample(ordering.task("g"), start, np.zeros(6), ordering, rng)
    m1 = scene.apply_post_conditions(ordering, start, TransitionOption("g", ("h", "h")), qg)
    hits = 0
    for _ in range(30):
        qh = scene.constraint_sample(ordering.task("h"), m1, qg, ordering, rng)
        if qh is None:
            continue  # single draws may fail near the workspace edge
        hits += 1
        assert scene.constraint_satisfied(ordering.task("h"), m1, qh, ordering)
        ee_g = scene.ee_pose("r1", qh)
        ee_r = scene.ee_pose("r2", qh)
        assert math.hypot(ee_g.x - ee_r.x, ee_g.y - ee_r.y) < 1e-9
    assert hits >= 10


def test_apply_post_conditions_rejects_unsatisfied_config():
    scene, ordering, start = manipulation_setup()
    with pytest.raises(TransitionError, match="constraint"):
        scene.apply_post_conditions(
            ordering, start, TransitionOption("g", ("h", "h")), np.zeros(6)
        )


def test_pose_goal_exactness_tolerance():
    scene, ordering, start = manipulation_setup()
    fin = ordering.task("fin")
    mode = Mode(("fin", "fin"), frozenset({"g", "h", "p"}),
                (ObjectPose("o1", "world", 2.0, 2.0, 0.0),))
    q = np.array([-1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    assert scene.constraint_satisfied(fin, mode, q, ordering)
    q2 = q.copy()
    q2[0] += 1e-7
    assert not scene.constraint_satisfied(fin, mode, q2, ordering)


def test_within_limits_and_layout():
    scene = simple_scene()
    assert scene.dim == 4
    assert scene.robot_slice("r2") == slice(2, 4)
    assert scene.within_limits(np.array([0, 0, 5.0, -5.0]))
    assert not scene.within_limits(np.array([0, 0, 5.1, 0.0]))
    parts = scene.split(np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_allclose(parts[1], [3.0, 4.0])
