"""Samplers shared by all planners: uniform configurations, mode selection
over the reached-mode graph, goal/transition configurations, and informed
resampling around an incumbent solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import TransitionError
from .space import CompositeSpace, TimedPath
from .tasks import (
    Mode,
    ModeGraph,
    OrderingGraph,
    TransitionOption,
    activation_child,
    oracle_next_assignments,
)


def sample_uniform_config(space: CompositeSpace, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(space.limits[0], space.limits[1])


# -- mode selection -----------------------------------------------------------


@dataclass(frozen=True)
class ModeSamplerParams:
    """Mixture weights for choosing which reached mode to grow next.

    With probability ``bias`` the draw goes to the expanding edge of the
    search: within that, a ``latest_share`` fraction goes to the most
    recently discovered mode and the rest is uniform over modes that still
    have unexplored successors.  The remaining ``1 - bias`` is spread
    uniformly over fully expanded (interior) modes.
    """

    bias: float = 0.9
    latest_share: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError("bias must lie in [0, 1]")
        if not 0.0 <= self.latest_share <= 1.0:
            raise ValueError("latest_share must lie in [0, 1]")


MODE_SAMPLER_PRESETS = {
    "frontier": ModeSamplerParams(0.9, 0.5),
    "greedy": ModeSamplerParams(1.0, 1.0),
    "uniform": ModeSamplerParams(0.5, 0.0),
}


def sample_mode(graph: ModeGraph, params: ModeSamplerParams, rng: np.random.Generator) -> Mode:
    """Draw a reached mode from the frontier/latest/interior mixture.

    Empty buckets fall through: an empty chosen bucket falls back to the
    frontier, and an empty frontier falls back to the newest mode, which
    always exists."""
    u = rng.random()
    if u < params.bias * (1.0 - params.latest_share):
        bucket = graph.frontier
    elif u < params.bias:
        bucket = [graph.latest]
    else:
        bucket = graph.interior
    if not bucket:
        bucket = graph.frontier
    if not bucket:
        bucket = [graph.latest]
    return bucket[int(rng.integers(len(bucket)))]


# -- transition configurations -------------------------------------------------


@dataclass(eq=False)
class TransitionSample:
    """A configuration at which one successor option of ``parent`` fires."""

    q: np.ndarray
    option: TransitionOption
    parent: Mode
    child: Mode


def sample_transition(
    space: CompositeSpace,
    mode: Mode,
    ordering: OrderingGraph,
    rng: np.random.Generator,
    options: list[TransitionOption] | None = None,
    budget: int = 50,
) -> TransitionSample | None:
    """Rejection-sample a configuration that completes one successor option
    of ``mode``: it must satisfy the finishing task's constraint and be
    collision-free in both the current mode and the successor.  Returns
    None when the attempt budget runs out, which callers treat as an
    ordinary miss."""
    if options is None:
        options = oracle_next_assignments(ordering, mode)
    if not options:
        return None
    scene = space.scene
    for _ in range(budget):
        opt = options[int(rng.integers(len(options)))]
        base = sample_uniform_config(space, rng)
        if opt.completed_task is None:
            # activation: assignments change, the world does not
            if not space.config_valid(base, mode):
                continue
            return TransitionSample(base, opt, mode, activation_child(mode, opt))
        task = ordering.task(opt.completed_task)
        q = scene.constraint_sample(task, mode, base, ordering, rng)
        if q is None or not scene.within_limits(q):
            # constraint sampling is real work: bill it so a planner stuck
            # on an unreachable transition still consumes its budget
            space.checks += 1
            continue
        if not space.config_valid(q, mode):
            continue
        try:
            child = scene.apply_post_conditions(ordering, mode, opt, q)
        except TransitionError:
            continue
        if not space.config_valid(q, child):
            continue
        return TransitionSample(q, opt, mode, child)
    return None


# -- informed resampling --------------------------------------------------------


@dataclass(eq=False)
class InformedContext:
    """Incumbent-path data the informed samplers draw against."""

    configs: np.ndarray
    modes: tuple[Mode, ...]
    prefix: np.ndarray

    @classmethod
    def from_path(cls, space: CompositeSpace, path: TimedPath) -> "InformedContext":
        return cls(path.configs, path.modes, path.prefix_costs(space))

    @property
    def total_cost(self) -> float:
        return float(self.prefix[-1])


def in_informed_set(
    space: CompositeSpace,
    q: np.ndarray,
    qa: np.ndarray,
    qb: np.ndarray,
    budget: float,
    tol: float = 1e-9,
) -> bool:
    """True when a path through ``q`` between the anchors could still beat
    ``budget`` (two-segment lower bound)."""
    detour = float(space.segment_cost(qa, q)) + float(space.segment_cost(q, qb))
    return detour <= budget + tol

def sample_informed(
    space: CompositeSpace,
    ctx: InformedContext,
    rng: np.random.Generator,
    regime: str = "local",
    tries: int = 50,
) -> tuple[np.ndarray, Mode] | None:
    """Draw a configuration that could shorten the incumbent path.

    ``local`` picks a random waypoint pair and samples inside the corridor
    whose two-segment detour beats the incumbent cost between those
    waypoints; the mode is drawn uniformly from the modes spanned.
    ``global`` anchors at the path endpoints.  Every corridor is contained
    in the endpoint corridor, so local draws never leave the set global
    draws cover."""
    n = len(ctx.configs)
    if n < 2:
        return None
    for _ in range(tries):
        if regime == "global":
            i, j = 0, n - 1
        else:
            i = int(rng.integers(0, n - 1))
            j = int(rng.integers(i + 1, n))
        budget = float(ctx.prefix[j] - ctx.prefix[i])
        q = sample_uniform_config(space, rng)
        if in_informed_set(space, q, ctx.configs[i], ctx.configs[j], budget):
            span = ctx.modes[i : j + 1]
            mode = span[int(rng.integers(len(span)))]
            return q, mode
    return None
