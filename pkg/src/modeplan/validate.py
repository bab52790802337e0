"""Independent validation of timed multi-robot paths.

The validator re-derives everything from the scene, the ordering oracle, and
the raw path data: it never trusts planner bookkeeping.  Collision checks run
at half the planning resolution by default and go straight to the scene, so
validation does not advance the collision-check clock planners are timed by.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import SceneGraph, TransitionError
from .space import CompositeSpace, State, TimedPath
from .tasks import Mode, OrderingGraph, is_terminal, oracle_next_assignments


@dataclass(frozen=True)
class Violation:
    """One way a path failed validation.

    kind is one of: "times", "limits", "start-config", "start-mode",
    "junction", "collision", "terminal".
    """

    kind: str
    index: int | None
    detail: str


def _transition_chain(
    scene: SceneGraph,
    ordering: OrderingGraph,
    m_from: Mode,
    m_to: Mode,
    q: np.ndarray,
    max_depth: int = 4,
) -> bool:
    """Whether ``m_to`` is reachable from ``m_from`` by task completions or
    activations that all fire legally at configuration ``q``.  Multiple
    constraints can coincide at one configuration, so a junction may chain
    a few steps."""
    if m_from == m_to:
        return True
    seen = {m_from.signature}
    layer = [m_from]
    for _ in range(max_depth):
        nxt = []
        for m in layer:
            for opt in oracle_next_assignments(ordering, m):
                try:
                    child = scene.apply_post_conditions(ordering, m, opt, q)
                except TransitionError:
                    continue
                if child == m_to:
                    return True
                if child.signature not in seen:
                    seen.add(child.signature)
                    nxt.append(child)
        layer = nxt
        if not layer:
            break
    return False


def validate_timed_path(
    space: CompositeSpace,
    ordering: OrderingGraph,
    path: TimedPath,
    start_state: State | None = None,
    resolution: float | None = None,
) -> list[Violation]:
    """Check a timed path end to end; an empty list means valid.

    Verified properties: strictly increasing timestamps; every waypoint
    within joint limits; the first waypoint matching the given start (mode
    changes at the start configuration are fine if the oracle licenses
    them); every mode change licensed by the oracle with the finishing
    constraints holding at the junction configuration; every segment
    collision-free in its own mode at the check resolution; and the final
    mode completing the terminal task."""
    scene = space.scene
    res = float(resolution) if resolution is not None else space.resolution / 2.0
    out: list[Violation] = []
    times = np.asarray(path.times, dtype=float)
    n = len(path.modes)
    if times.shape != (n,) or path.configs.shape[0] != n:
        out.append(Violation("times", None, "times/configs/modes lengths differ"))
        return out
    if n == 0:
        out.append(Violation("times", None, "empty path"))
        return out
    bad = np.nonzero(np.diff(times) <= 0.0)[0]
    for i in bad:
        out.append(
            Violation("times", int(i) + 1, f"timestamp does not increase at waypoint {i + 1}")
        )
    for i in range(n):
        if not scene.within_limits(path.configs[i]):
            out.append(Violation("limits", i, f"waypoint {i} violates joint limits"))
    if start_state is not None:
        if not np.allclose(path.configs[0], start_state.q, atol=1e-9):
            out.append(Violation("start-config", 0, "first waypoint is not the start configuration"))
        elif path.modes[0] != start_state.mode and not _transition_chain(
            scene, ordering, start_state.mode, path.modes[0], path.configs[0]
        ):
            out.append(Violation("start-mode", 0, "first mode unreachable from the start mode"))
    for i in range(1, n):
        if path.modes[i] != path.modes[i - 1]:
            if not _transition_chain(
                scene, ordering, path.modes[i - 1], path.modes[i], path.configs[i]
            ):
                out.append(
                    Violation("junction", i, f"mode change at waypoint {i} is not licensed")
                )
    if n == 1:
        if not scene.world_collision_free(path.configs[0], path.modes[0]):
            out.append(Violation("collision", 0, "start configuration collides"))
    for i in range(n - 1):
        q1, q2 = path.configs[i], path.configs[i + 1]
        d = float(space.mode_dist(q1, q2))
        count = max(2, int(math.ceil(d / res)) + 1)
        Q = np.linspace(q1, q2, count)
        if not scene.collision_free_batch(Q, path.modes[i]).all():
            out.append(Violation("collision", i, f"segment {i} collides"))
    if not is_terminal(ordering, path.modes[-1]):
        out.append(Violation("terminal", n - 1, "path does not complete the terminal task"))
    return out


def path_valid(
    space: CompositeSpace,
    ordering: OrderingGraph,
    path: TimedPath,
    start_state: State | None = None,
    resolution: float | None = None,
) -> bool:
    return not validate_timed_path(space, ordering, path, start_state, resolution)
