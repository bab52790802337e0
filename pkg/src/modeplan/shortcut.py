"""Per-robot partial shortcutting of timed composite paths.

Classic shortcutting moves every robot at once and mostly fails in tight
multi-robot scenes; replacing one robot's motion between two waypoints while
the others keep theirs succeeds far more often.  Junction waypoints (where a
task completes) are pinned: only the free interior of an equal-mode window
ever moves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import CompositeSpace, State, TimedPath, time_parameterize


@dataclass(frozen=True)
class ShortcutParams:
    max_iterations: int = 200
    stop_window: int = 100       # iterations between convergence checks
    stop_improvement: float = 1e-6


def _mode_windows(modes) -> list[tuple[int, int]]:
    """Inclusive index windows [a, b] whose segments all run in one mode.

    A window spans a maximal run of equal-mode waypoints plus the junction
    waypoint that ends it, since the segment into a junction still runs in
    the pre-transition mode.  Only windows with at least one interior
    waypoint are returned."""
    n = len(modes)
    out = []
    a = 0
    for k in range(1, n + 1):
        if k == n or modes[k] != modes[k - 1]:
            right = min(k, n - 1)
            if right - a >= 2:
                out.append((a, right))
            a = k
    return out


def partial_shortcut(
    space: CompositeSpace,
    path: TimedPath,
    rng: np.random.Generator,
    params: ShortcutParams | None = None,
) -> TimedPath:
    """Iteratively straighten one robot at a time between two random
    waypoints of an equal-mode window, keeping everything else fixed.
    Accepts only collision-free, cost-reducing replacements; cost never
    increases.  Stops early once a block of iterations stops paying."""
    params = params or ShortcutParams()
    n = len(path)
    if n < 3:
        return path
    configs = path.configs.copy()
    modes = tuple(path.modes)
    t = path.times
    windows = _mode_windows(modes)
    if not windows:
        return path
    n_rob = len(space.scene.robots)
    total = space.path_cost(configs)
    checkpoint = total
    for it in range(1, params.max_iterations + 1):
        a, right = windows[int(rng.integers(len(windows)))]
        i = int(rng.integers(a, right - 1))
        j = int(rng.integers(i + 2, right + 1))
        r = int(rng.integers(n_rob))
        sl = space.scene.robot_slice(r)
        seg = configs[i : j + 1]
        frac = (t[i : j + 1] - t[i]) / (t[j] - t[i])
        candidate = seg.copy()
        candidate[:, sl] = (1.0 - frac)[:, None] * seg[0, sl] + frac[:, None] * seg[-1, sl]
        old_cost = float(np.sum(space.segment_cost(seg[:-1], seg[1:])))
        new_cost = float(np.sum(space.segment_cost(candidate[:-1], candidate[1:])))
        if new_cost >= old_cost - 1e-12:
            continue
        mode = modes[i]
        if all(
            space.edge_valid(candidate[k], candidate[k + 1], mode)
            for k in range(len(candidate) - 1)
        ):
            configs[i : j + 1] = candidate
            total -= old_cost - new_cost
        if it % params.stop_window == 0:
            if checkpoint - total < params.stop_improvement:
                break
            checkpoint = total
    states = [State(configs[k], modes[k]) for k in range(n)]
    return time_parameterize(space, states, start_time=float(t[0]))
