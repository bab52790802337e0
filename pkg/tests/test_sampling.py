"""Sampler distribution, transition-sampling, and informed-corridor tests."""

import math

import numpy as np
import pytest

from modeplan.geom2d import Circle, Pose2
from modeplan.scene import GraspSpec, MovableObject, SceneGraph, disk_robot
from modeplan.space import CompositeSpace, CostParams, State, time_parameterize
from modeplan.sampling import (
    MODE_SAMPLER_PRESETS,
    InformedContext,
    ModeSamplerParams,
    in_informed_set,
    sample_informed,
    sample_mode,
    sample_transition,
    sample_uniform_config,
)
from modeplan.tasks import (
    GraspGoal,
    ModeGraph,
    OrderingGraph,
    PoseGoal,
    Task,
    initial_mode,
    symbolic_step,
)


PLANE = ((-5.0, 5.0), (-5.0, 5.0))


def pose_task(tid, robots, target=(0.0, 0.0), pool=False):
    goal = PoseGoal(tuple((r, tuple(target)) for r in robots))
    return Task(tid, tuple(robots), goal, pool=pool)


def independent_ordering():
    tasks = (
        pose_task("t1", ["r1"]),
        pose_task("t2", ["r2"]),
        pose_task("t3", ["r3"]),
        pose_task("fin", ["r1", "r2", "r3"]),
    )
    edges = (("t1", "fin"), ("t2", "fin"), ("t3", "fin"))
    return OrderingGraph(("r1", "r2", "r3"), tasks, edges, "fin", "partial")


def expanded_graph(n_children=3):
    ordering = independent_ordering()
    start = initial_mode(ordering)
    graph = ModeGraph(ordering, start)
    kids = []
    for opt in graph.options(start)[:n_children]:
        kids.append(graph.add(start, symbolic_step(start, opt, ordering)))
    return graph, start, kids


def draw_frequencies(graph, params, n, seed=0):
    rng = np.random.default_rng(seed)
    counts: dict = {}
    for _ in range(n):
        m = sample_mode(graph, params, rng)
        counts[m.signature] = counts.get(m.signature, 0) + 1
    return {sig: c / n for sig, c in counts.items()}


def test_mode_sampler_mixture_frequencies():
    graph, start, kids = expanded_graph(3)
    assert graph.interior == [start]
    assert graph.frontier == kids
    assert graph.latest == kids[-1]
    freqs = draw_frequencies(graph, MODE_SAMPLER_PRESETS["frontier"], 20000)
    # 0.45 spread over the frontier, 0.45 on the newest mode, 0.10 interior
    expected = {
        start.signature: 0.10,
        kids[0].signature: 0.15,
        kids[1].signature: 0.15,
        kids[2].signature: 0.60,
    }
    for sig, p in expected.items():
        assert freqs.get(sig, 0.0) == pytest.approx(p, abs=0.02)


def test_mode_sampler_empty_interior_falls_back_to_frontier():
    graph, start, kids = expanded_graph(2)
    assert graph.interior == []
    assert set(m.signature for m in graph.frontier) == {
        start.signature,
        kids[0].signature,
        kids[1].signature,
    }
    freqs = draw_frequencies(graph, MODE_SAMPLER_PRESETS["frontier"], 20000)
    third = 0.10 / 3.0
    expected = {
        start.signature: 0.15 + third,
        kids[0].signature: 0.15 + third,
        kids[1].signature: 0.60 + third,
    }
    for sig, p in expected.items():
        assert freqs.get(sig, 0.0) == pytest.approx(p, abs=0.02)


def test_mode_sampler_greedy_and_uniform_presets():
    graph, start, kids = expanded_graph(3)
    freqs = draw_frequencies(graph, MODE_SAMPLER_PRESETS["greedy"], 500)
    assert freqs == {kids[-1].signature: 1.0}
    freqs = draw_frequencies(graph, MODE_SAMPLER_PRESETS["uniform"], 20000)
    expected = {start.signature: 0.5}
    for k in kids:
        expected[k.signature] = 0.5 / 3.0
    for sig, p in expected.items():
        assert freqs.get(sig, 0.0) == pytest.approx(p, abs=0.02)


def test_mode_sampler_params_validation_and_determinism():
    with pytest.raises(ValueError):
        ModeSamplerParams(1.2, 0.5)
    with pytest.raises(ValueError):
        ModeSamplerParams(0.9, -0.1)
    graph, _, _ = expanded_graph(3)
    params = MODE_SAMPLER_PRESETS["frontier"]
    # same seed, same draws
    rng1, rng2 = np.random.default_rng(42), np.random.default_rng(42)
    for _ in range(50):
        assert sample_mode(graph, params, rng1) == sample_mode(graph, params, rng2)


def test_uniform_config_covers_limits():
    scene = SceneGraph(robots=[disk_robot("r1", 0.3, PLANE), disk_robot("r2", 0.3, PLANE)])
    space = CompositeSpace(scene)
    rng = np.random.default_rng(1)
    draws = np.stack([sample_uniform_config(space, rng) for _ in range(2000)])
    assert np.all(draws >= space.limits[0]) and np.all(draws <= space.limits[1])
    assert np.abs(draws.mean(axis=0)).max() < 0.3
    assert draws.min(axis=0).max() < -4.5
    assert draws.max(axis=0).min() > 4.5


def grasp_setup(obj_xy=(1.0, 1.0)):
    heading = ((-5.0, 5.0), (-5.0, 5.0), (-math.pi, math.pi))
    scene = SceneGraph(
        robots=[
            disk_robot("r1", 0.3, heading, ee_offset=Pose2(0.5, 0.0, 0.0), heading=True)
        ],
        movables=[
            MovableObject("o1", Circle(0.1), (GraspSpec(anchor=(0.0, 0.0), approach=0.0),))
        ],
    )
    tasks = (
        Task("g", ("r1",), GraspGoal("o1")),
        Task("fin", ("r1",), PoseGoal((("r1", (-1.0, -1.0, 0.0)),))),
    )
    ordering = OrderingGraph(("r1",), tasks, (("g", "fin"),), "fin")
    start = initial_mode(
        ordering, scene.initial_object_poses({"o1": (obj_xy[0], obj_xy[1], 0.5)})
    )
    return CompositeSpace(scene), ordering, start


def test_sample_transition_grasp():
    space, ordering, start = grasp_setup()
    rng = np.random.default_rng(5)
    s = sample_transition(space, start, ordering, rng)
    assert s is not None
    assert s.option.completed_task == "g"
    assert s.parent == start
    assert s.child.completed == frozenset({"g"})
    assert s.child.object_parent("o1") == "r1"
    assert space.scene.within_limits(s.q)
    assert space.scene.constraint_satisfied(ordering.task("g"), start, s.q, ordering)
    assert space.scene.world_collision_free(s.q, start)
    assert space.scene.world_collision_free(s.q, s.child)


def test_sample_transition_deterministic_and_budgeted():
    space, ordering, start = grasp_setup()
    a = sample_transition(space, start, ordering, np.random.default_rng(5))
    b = sample_transition(space, start, ordering, np.random.default_rng(5))
    assert np.array_equal(a.q, b.q) and a.option == b.option
    # a grasp out of reach exhausts the attempt budget
    space2, ordering2, start2 = grasp_setup(obj_xy=(6.5, 0.0))
    assert sample_transition(space2, start2, ordering2, np.random.default_rng(5), budget=10) is None


def test_sample_transition_activation():
    scene = SceneGraph(robots=[disk_robot("r1", 0.3, PLANE), disk_robot("r2", 0.3, PLANE)])
    space = CompositeSpace(scene)
    tasks = (
        pose_task("u", ["r1", "r2"], target=(2.0, 2.0), pool=True),
        pose_task("v", ["r1", "r2"], target=(-2.0, 2.0), pool=True),
        pose_task("fin", ["r1", "r2"], target=(0.0, -2.0)),
    )
    ordering = OrderingGraph(
        ("r1", "r2"), tasks, (("u", "fin"), ("v", "fin")), "fin", "pool"
    )
    start = initial_mode(ordering)
    assert all(a is None for a in start.assignment)
    s = sample_transition(space, start, ordering, np.random.default_rng(3))
    assert s is not None
    assert s.option.completed_task is None
    assert s.child.completed == frozenset()
    assert None not in s.child.assignment
    assert set(s.child.assignment) == {"u", "v"}
    assert s.child.object_poses == start.object_poses


def corridor_setup():
    scene = SceneGraph(robots=[disk_robot("r1", 0.3, PLANE)])
    fin = Task("fin", ("r1",), PoseGoal((("r1", (2.0, 0.0)),)))
    ordering = OrderingGraph(("r1",), (fin,), (), "fin")
    space = CompositeSpace(scene, CostParams(1.0))
    return space, initial_mode(ordering)


def test_in_informed_set_two_segment_bound():
    space, mode = corridor_setup()
    A, B = np.array([-2.0, 0.0]), np.array([2.0, 0.0])
    bent_cost = 2.0 * math.hypot(2.0, 2.0)
    assert in_informed_set(space, np.array([0.0, 2.0]), A, B, bent_cost)
    assert not in_informed_set(space, np.array([0.0, 5.0]), A, B, bent_cost)
    # the straight-line cost admits only the segment itself
    assert in_informed_set(space, np.array([0.0, 0.0]), A, B, 4.0)
    assert not in_informed_set(space, np.array([0.0, 0.1]), A, B, 4.0)


def test_informed_local_rejects_on_taut_path():
    space, mode = corridor_setup()
    taut = [State(np.array([-2.0, 0.0]), mode), State(np.array([2.0, 0.0]), mode)]
    ctx = InformedContext.from_path(space, time_parameterize(space, taut))
    assert sample_informed(space, ctx, np.random.default_rng(0), "local", tries=50) is None


def test_informed_corridor_accepts_and_stays_inside():
    space, mode = corridor_setup()
    bent = [
        State(np.array([-2.0, 0.0]), mode),
        State(np.array([0.0, 2.0]), mode),
        State(np.array([2.0, 0.0]), mode),
    ]
    ctx = InformedContext.from_path(space, time_parameterize(space, bent))
    total = ctx.total_cost
    assert total == pytest.approx(2.0 * math.hypot(2.0, 2.0))
    rng = np.random.default_rng(2)
    hits = 0
    for _ in range(20):
        out = sample_informed(space, ctx, rng, "local", tries=200)
        if out is None:
            continue
        q, m = out
        hits += 1
        assert m == mode
        # every corridor draw could still shorten the incumbent end to end
        assert in_informed_set(space, q, ctx.configs[0], ctx.configs[-1], total)
    assert hits >= 5
    for _ in range(5):
        out = sample_informed(space, ctx, rng, "global", tries=200)
        assert out is not None
        q, m = out
        assert in_informed_set(space, q, ctx.configs[0], ctx.configs[-1], total)
