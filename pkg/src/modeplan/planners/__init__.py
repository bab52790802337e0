"""Planner registry.

Four planners share one configuration object and one result shape: two
tree planners over the composite space (single tree and bidirectional),
a batched lazy roadmap, and a prioritized sequential baseline."""

from __future__ import annotations

from .base import (
    PLANNER_KINDS,
    BasePlanner,
    PlannerConfig,
    RunResult,
    SolutionRecord,
)
from .heuristics import TransitionHeuristic
from .prioritized import PrioritizedPlanner
from .prmstar import PRMStarPlanner
from .rrtstar import BiRRTStarPlanner, RRTStarPlanner

_REGISTRY: dict[str, type[BasePlanner]] = {
    "rrtstar": RRTStarPlanner,
    "birrtstar": BiRRTStarPlanner,
    "prmstar": PRMStarPlanner,
    "prioritized": PrioritizedPlanner,
}


def make_planner(space, ordering, start, config: PlannerConfig) -> BasePlanner:
    try:
        cls = _REGISTRY[config.kind]
    except KeyError:
        raise ValueError(
            f"unknown planner kind {config.kind!r}; expected one of {PLANNER_KINDS}"
        ) from None
    return cls(space, ordering, start, config)


__all__ = [
    "PLANNER_KINDS",
    "BasePlanner",
    "BiRRTStarPlanner",
    "PlannerConfig",
    "PRMStarPlanner",
    "PrioritizedPlanner",
    "RRTStarPlanner",
    "RunResult",
    "SolutionRecord",
    "TransitionHeuristic",
    "make_planner",
]
