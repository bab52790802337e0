"""Transition-graph cost-to-go bounds: exact chain values, variants, and
admissibility against an independent grid search."""

import heapq
import math

import numpy as np
import pytest

from modeplan.geom2d import AxisBox, Pose2
from modeplan.scene import SceneGraph, disk_robot
from modeplan.space import CompositeSpace, CostParams, State
from modeplan.tasks import (
    ModeGraph,
    OrderingGraph,
    PoseGoal,
    Task,
    initial_mode,
    is_terminal,
    symbolic_step,
)
from modeplan.planners.heuristics import TransitionHeuristic, TransitionNode

PLANE = ((-4.0, 4.0), (-4.0, 4.0))


def chain_instance(statics=(), t_xy=(0.0, 2.0), f_xy=(3.0, -1.0)):
    """One robot, two pose tasks in a row: mode A --t--> B --f--> terminal."""
    scene = SceneGraph(robots=[disk_robot("r1", 0.3, PLANE)], statics=list(statics))
    tasks = (
        Task("t", ("r1",), PoseGoal((("r1", tuple(t_xy)),))),
        Task("f", ("r1",), PoseGoal((("r1", tuple(f_xy)),))),
    )
    ordering = OrderingGraph(("r1",), tasks, (("t", "f"),), "f")
    space = CompositeSpace(scene, CostParams(1.0))
    mode_a = initial_mode(ordering)
    graph = ModeGraph(ordering, mode_a)
    opt_t = next(o for o in graph.options(mode_a) if o.completed_task == "t")
    mode_b = graph.add(mode_a, symbolic_step(mode_a, opt_t, ordering))
    opt_f = next(o for o in graph.options(mode_b) if o.completed_task == "f")
    mode_c = graph.add(mode_b, symbolic_step(mode_b, opt_f, ordering))
    assert is_terminal(ordering, mode_c)
    qt = np.array(t_xy, dtype=float)
    qf = np.array(f_xy, dtype=float)
    transitions = [
        TransitionNode(qt, mode_a, mode_b, opt_t),
        TransitionNode(qf, mode_b, mode_c, opt_f),
    ]
    return space, ordering, (mode_a, mode_b, mode_c), transitions


def test_terminal_state_and_single_chain_are_exact():
    space, ordering, (ma, mb, mc), trs = chain_instance()
    hr = TransitionHeuristic(space, ordering, trs, "reverse")
    # value after the last hop is zero, one hop earlier it is the hop cost
    assert hr.dist[1] == 0.0
    leg = math.hypot(3.0 - 0.0, -1.0 - 2.0)
    assert hr.dist[0] == pytest.approx(leg, abs=1e-12)
    assert hr.h(np.array([1.0, 1.0]), mc) == 0.0
    # obstacle-free straight chain: the bound is the exact remaining cost
    q = np.array([-2.0, -1.0])
    assert hr.h(q, ma) == pytest.approx(
        math.hypot(2.0, 3.0) + leg, abs=1e-12
    )
    assert hr.h(q, mb) == pytest.approx(math.hypot(5.0, 0.0), abs=1e-12)
    assert not math.isinf(hr.h_batch(np.array([[0.0, 0.0]]), ma)[0])
    # with the terminal-reaching hop removed the chain prices as unreachable
    hr_cut = TransitionHeuristic(space, ordering, [trs[0]], "reverse")
    assert math.isinf(hr_cut.h(q, ma))


def test_forward_variant_mirrors_reverse_on_symmetric_chain():
    space, ordering, (ma, mb, mc), trs = chain_instance(t_xy=(0.0, 0.0), f_xy=(3.0, 0.0))
    start = State(np.array([-3.0, 0.0]), ma)
    fwd = TransitionHeuristic(space, ordering, trs, "forward", start=start)
    rev = TransitionHeuristic(space, ordering, trs, "reverse")
    # the instance is a straight line with the start mirroring the goal
    assert fwd.dist[0] == pytest.approx(3.0, abs=1e-12)
    assert fwd.dist[1] == pytest.approx(6.0, abs=1e-12)
    assert rev.dist[1] == 0.0
    assert rev.dist[0] == pytest.approx(3.0, abs=1e-12)
    assert fwd.reach_bound(start.q, ma) == 0.0
    assert fwd.reach_bound(np.array([3.0, 0.0]), mc) == pytest.approx(6.0, abs=1e-12)
    with pytest.raises(ValueError):
        rev.reach_bound(start.q, ma)
    with pytest.raises(ValueError):
        TransitionHeuristic(space, ordering, trs, "forward")  # needs a start
    with pytest.raises(ValueError):
        TransitionHeuristic(space, ordering, trs, "sideways")


def test_effort_variant_counts_checks():
    res = 0.05
    space, ordering, (ma, mb, mc), trs = chain_instance(
        t_xy=(0.0, 0.0), f_xy=(10 * res, 0.0)
    )
    hr = TransitionHeuristic(space, ordering, trs, "effort")
    # an arc spanning ten resolution steps prices eleven checks
    assert hr.dist[0] == 11.0
    # a zero-length arc still prices the one check at the shared config
    assert hr.h(np.array([0.0, 0.0]), ma) == pytest.approx(1.0 + 11.0)


def _grid_dijkstra(scene, mode, src_xy, spacing=0.1):
    """Shortest feasible polyline costs over a 16-connected grid; infeasible
    probes are dropped, edges are verified densely so every finite value is
    the cost of an actual collision-free path (an upper bound on optimal)."""
    lo, hi = -4.0, 4.0
    n = int(round((hi - lo) / spacing)) + 1
    free = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            q = np.array([lo + i * spacing, lo + j * spacing])
            free[i, j] = scene.world_collision_free(q, mode)
    moves = [
        (1, 0), (-1, 0), (0, 1), (0, -1),
        (1, 1), (1, -1), (-1, 1), (-1, -1),
        (1, 2), (1, -2), (-1, 2), (-1, -2),
        (2, 1), (2, -1), (-2, 1), (-2, -1),
    ]
    def edge_free(ai, aj, bi, bj):
        qa = np.array([lo + ai * spacing, lo + aj * spacing])
        qb = np.array([lo + bi * spacing, lo + bj * spacing])
        for s in np.linspace(0.0, 1.0, 8):
            if not scene.world_collision_free(qa + s * (qb - qa), mode):
                return False
        return True
    si = int(round((src_xy[0] - lo) / spacing))
    sj = int(round((src_xy[1] - lo) / spacing))
    dist = np.full((n, n), math.inf)
    dist[si, sj] = 0.0
    heap = [(0.0, si, sj)]
    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        for di, dj in moves:
            bi, bj = i + di, j + dj
            if not (0 <= bi < n and 0 <= bj < n) or not free[bi, bj]:
                continue
            nd = d + spacing * math.hypot(di, dj)
            if nd < dist[bi, bj] and edge_free(i, j, bi, bj):
                dist[bi, bj] = nd
                heapq.heappush(heap, (nd, bi, bj))
    return dist, free, lo, spacing


def test_reverse_bound_admissible_against_grid_oracle():
    wall = (AxisBox(0.2, 3.0), Pose2(0.0, 0.0, 0.0))
    t_xy, f_xy = (1.0, 2.0), (3.0, -1.0)
    space, ordering, (ma, mb, mc), trs = chain_instance(
        statics=[wall], t_xy=t_xy, f_xy=f_xy
    )
    hr = TransitionHeuristic(space, ordering, trs, "reverse")
    scene = space.scene
    d_to_t, free, lo, spacing = _grid_dijkstra(scene, ma, t_xy)
    d_to_f, _, _, _ = _grid_dijkstra(scene, mb, f_xy)
    ti = int(round((t_xy[0] - lo) / spacing))
    tj = int(round((t_xy[1] - lo) / spacing))
    leg_b = d_to_f[ti, tj]
    assert math.isfinite(leg_b)
    rng = np.random.default_rng(11)
    n = free.shape[0]
    tested = 0
    while tested < 100:
        i, j = int(rng.integers(n)), int(rng.integers(n))
        if not free[i, j] or not math.isfinite(d_to_t[i, j]):
            continue
        q = np.array([lo + i * spacing, lo + j * spacing])
        # a real path exists at this cost, so the bound must sit below it
        assert hr.h(q, ma) <= d_to_t[i, j] + leg_b + 1e-9
        tested += 1
