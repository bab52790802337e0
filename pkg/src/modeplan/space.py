"""Composite configuration space: distances, segment costs, discretized
motion validation, and timed multi-robot paths.

The planners never talk to the scene directly; they go through
:class:`CompositeSpace`, which owns the cost weighting, the collision-check
resolution, and the running count of collision checks.  That count doubles
as the deterministic clock for benchmark runs: dividing it by a fixed
checks-per-second rate yields reproducible "elapsed seconds" that do not
depend on machine load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import SceneGraph, TransitionError
from .tasks import Mode, OrderingGraph, oracle_next_assignments

_BISECT_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _bisection_order(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Probe order for n evenly spaced samples: endpoints, then midpoints,
    breadth-first.  Finds a mid-segment obstacle in a handful of probes.

    Returns the index order plus the matching interpolation fractions as a
    column, so callers can build the probe batch with one broadcast."""
    hit = _BISECT_CACHE.get(n)
    if hit is not None:
        return hit
    if n == 1:
        order = [0]
    else:
        order = [0, n - 1]
        frontier = [(0, n - 1)]
        while frontier:
            nxt = []
            for lo, hi in frontier:
                if hi - lo < 2:
                    continue
                mid = (lo + hi) // 2
                order.append(mid)
                nxt.append((lo, mid))
                nxt.append((mid, hi))
            frontier = nxt
    arr = np.array(order)
    fracs = (arr / max(n - 1, 1))[:, None]
    _BISECT_CACHE[n] = (arr, fracs)
    return _BISECT_CACHE[n]


@dataclass(frozen=True)
class CostParams:
    """Weighting between the largest single-robot displacement and the sum
    of all displacements on a segment.

    ``weight = 1`` prices a segment purely by total movement, so robots may
    share one passage back to back at no penalty.  A small positive weight
    (e.g. 0.01) is dominated by the slowest robot's displacement, which
    rewards concurrent motion; it stays positive whenever anything moves,
    which pure max-only pricing would not.
    """

    weight: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.weight <= 1.0:
            raise ValueError("cost weight must lie in (0, 1]")


@dataclass(eq=False)
class State:
    """A composite configuration together with the mode it lives in."""

    q: np.ndarray
    mode: Mode

    def copy(self) -> "State":
        return State(np.array(self.q, dtype=float), self.mode)


class CompositeSpace:
    """Facade over a :class:`SceneGraph` for planning queries.

    Attributes
    ----------
    checks:
        Number of configurations collision-checked so far.  Edge validation
        adds its full discretization count whether or not the check fails,
        so the counter is deterministic for a given query sequence.
    """

    def __init__(
        self,
        scene: SceneGraph,
        params: CostParams | None = None,
        resolution: float = 0.05,
    ):
        if resolution <= 0.0:
            raise ValueError("resolution must be positive")
        self.scene = scene
        self.params = params if params is not None else CostParams()
        self.resolution = float(resolution)
        self.checks = 0
        self._slices = [scene.robot_slice(i) for i in range(len(scene.robots))]

    # -- layout ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.scene.dim

    @property
    def limits(self) -> np.ndarray:
        return self.scene.limits

    def reset_checks(self) -> None:
        self.checks = 0

    # -- metric ------------------------------------------------------------

    def per_robot_dists(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        """Euclidean displacement of each robot between two composite
        configurations; broadcasts over leading axes."""
        d = np.asarray(q2, dtype=float) - np.asarray(q1, dtype=float)
        out = np.empty(d.shape[:-1] + (len(self._slices),))
        for k, s in enumerate(self._slices):
            seg = d[..., s]
            out[..., k] = np.sqrt(np.einsum("...i,...i->...", seg, seg))
        return out

    def _pair_dists(self, q1: np.ndarray, q2: np.ndarray) -> list[float]:
        """Per-robot displacements of one configuration pair, plain floats;
        an order of magnitude cheaper than the array path for single pairs."""
        return [math.dist(q1[s], q2[s]) for s in self._slices]

    def mode_dist(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        """Distance within a shared mode: the largest per-robot displacement."""
        if np.ndim(q1) == 1 and np.ndim(q2) == 1:
            return max(self._pair_dists(q1, q2))
        return np.max(self.per_robot_dists(q1, q2), axis=-1)

    def segment_cost(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        w = self.params.weight
        if np.ndim(q1) == 1 and np.ndim(q2) == 1:
            ds = self._pair_dists(q1, q2)
            return (1.0 - w) * max(ds) + w * sum(ds)
        d = self.per_robot_dists(q1, q2)
        return (1.0 - w) * np.max(d, axis=-1) + w * np.sum(d, axis=-1)

    def path_cost(self, configs: np.ndarray) -> float:
        configs = np.asarray(configs, dtype=float)
        if configs.shape[0] < 2:
            return 0.0
        return float(np.sum(self.segment_cost(configs[:-1], configs[1:])))

    def state_distance(self, a: State, b: State, ordering: OrderingGraph) -> float:
        """Distance between full states.  Within one mode this is the
        max-displacement metric; a state sits at distance zero from its own
        image under a task completion at the same configuration; everything
        else is unreachable in one step."""
        if a.mode == b.mode:
            return float(self.mode_dist(a.q, b.q))
        if not np.array_equal(np.asarray(a.q, dtype=float), np.asarray(b.q, dtype=float)):
            return math.inf
        for opt in oracle_next_assignments(ordering, a.mode):
            try:
                child = self.scene.apply_post_conditions(ordering, a.mode, opt, a.q)
            except TransitionError:
                continue
            if child == b.mode:
                return 0.0
        return math.inf

    # -- local motions -------------------------------------------------------

    def lerp(self, q1: np.ndarray, q2: np.ndarray, s: float) -> np.ndarray:
        q1 = np.asarray(q1, dtype=float)
        q2 = np.asarray(q2, dtype=float)
        return q1 + s * (q2 - q1)

    def edge_check_count(self, q1: np.ndarray, q2: np.ndarray) -> int:
        """Number of configurations a straight segment is discretized into,
        endpoints included."""
        d = float(self.mode_dist(q1, q2))
        return max(2, int(math.ceil(d / self.resolution)) + 1)

    def config_valid(self, q: np.ndarray, mode: Mode) -> bool:
        self.checks += 1
        return self.scene.world_collision_free(q, mode)

    def edge_valid(self, q1: np.ndarray, q2: np.ndarray, mode: Mode) -> bool:
        """Collision-check a straight segment at the space resolution.  Both
        endpoints are included in the discretization and in the count.

        Configurations are probed endpoints-first, then recursively at
        midpoints, stopping at the first collision, so a blocked edge bills
        only the checks up to discovery while a free edge bills all of
        them.  The whole batch is evaluated in one vectorized call either
        way; the counter tracks the sequential probe order."""
        n = self.edge_check_count(q1, q2)
        _, fracs = _bisection_order(n)
        a = np.asarray(q1, dtype=float)
        Q = a + fracs * (np.asarray(q2, dtype=float) - a)
        free = self.scene.collision_free_batch(Q, mode)
        if free.all():
            self.checks += n
            return True
        self.checks += int(np.argmin(free)) + 1
        return False


# -- timed paths --------------------------------------------------------------


@dataclass(eq=False)
class TimedPath:
    """Piecewise-linear composite trajectory.

    Waypoint ``i`` carries the mode in force on the outgoing segment
    ``[i, i+1)``.  A task completion shows up as a change of mode between
    consecutive waypoints: the arrival configuration satisfies the finished
    task's constraint and the new mode applies from that waypoint onward,
    so a junction is one waypoint, not a pair, and timestamps stay strictly
    increasing.
    """

    times: np.ndarray
    configs: np.ndarray
    modes: tuple[Mode, ...]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.configs = np.asarray(self.configs, dtype=float)
        self.modes = tuple(self.modes)
        if not (len(self.times) == self.configs.shape[0] == len(self.modes)):
            raise ValueError("times, configs, and modes must have equal length")
        if len(self.times) and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def states(self) -> list[State]:
        return [State(self.configs[i].copy(), self.modes[i]) for i in range(len(self))]

    def transition_indices(self) -> list[int]:
        """Waypoints at which a task completes (the mode differs from the
        previous waypoint's)."""
        return [i for i in range(1, len(self)) if self.modes[i] != self.modes[i - 1]]

    def _segment(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), len(self) - 2) if len(self) > 1 else 0

    def config_at(self, t: float) -> np.ndarray:
        if len(self) == 1:
            return self.configs[0].copy()
        if t <= self.times[0]:
            return self.configs[0].copy()
        if t >= self.times[-1]:
            return self.configs[-1].copy()
        i = self._segment(t)
        span = self.times[i + 1] - self.times[i]
        s = (t - self.times[i]) / span
        return self.configs[i] + s * (self.configs[i + 1] - self.configs[i])

    def mode_at(self, t: float) -> Mode:
        """Mode in force at time ``t``.  At a junction's own timestamp the
        completed task's successor mode already applies."""
        if len(self) == 1 or t <= self.times[0]:
            return self.modes[0]
        if t >= self.times[-1]:
            return self.modes[-1]
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.modes[min(max(i, 0), len(self) - 1)]

    def cost(self, space: CompositeSpace) -> float:
        return space.path_cost(self.configs)

    def prefix_costs(self, space: CompositeSpace) -> np.ndarray:
        """Cumulative cost from the first waypoint to each waypoint."""
        if len(self) < 2:
            return np.zeros(len(self))
        seg = space.segment_cost(self.configs[:-1], self.configs[1:])
        return np.concatenate([[0.0], np.cumsum(seg)])


_DEDUP_TOL = 1e-12


def time_parameterize(
    space: CompositeSpace,
    states: list[State],
    speed: float = 1.0,
    start_time: float = 0.0,
) -> TimedPath:
    """Assign timestamps so the fastest-moving robot travels at ``speed``.

    Consecutive states at the same configuration are collapsed into a single
    waypoint keeping the newest mode, which turns at-rest task completions
    (twin states emitted by the planners) into proper junctions and keeps
    the timestamps strictly increasing.
    """
    if not states:
        raise ValueError("cannot time-parameterize an empty path")
    if speed <= 0.0:
        raise ValueError("speed must be positive")
    kept_q = [np.array(states[0].q, dtype=float)]
    kept_m = [states[0].mode]
    for st in states[1:]:
        q = np.asarray(st.q, dtype=float)
        if float(space.mode_dist(kept_q[-1], q)) <= _DEDUP_TOL:
            kept_m[-1] = st.mode
            continue
        kept_q.append(np.array(q))
        kept_m.append(st.mode)
    times = [float(start_time)]
    for i in range(1, len(kept_q)):
        step = float(space.mode_dist(kept_q[i - 1], kept_q[i])) / speed
        times.append(times[-1] + step)
    return TimedPath(np.array(times), np.stack(kept_q, axis=0), tuple(kept_m))
