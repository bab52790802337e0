"""Shared planner plumbing: configuration, run records, the virtual clock,
and the gated emission of improving solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..sampling import MODE_SAMPLER_PRESETS, InformedContext
from ..shortcut import ShortcutParams, partial_shortcut
from ..space import CompositeSpace, State, TimedPath, time_parameterize
from ..tasks import ModeGraph, OrderingGraph
from ..validate import validate_timed_path

PLANNER_KINDS = ("rrtstar", "birrtstar", "prmstar", "prioritized")


class PlannerStop(Exception):
    """Internal signal: the configured stop cost has been reached."""


@dataclass(frozen=True)
class PlannerConfig:
    """Everything that determines a run besides the problem itself.

    Time is virtual: the run ends once ``budget_s * checks_per_second``
    collision checks have been spent, so identical seeds give identical
    runs on any machine."""

    kind: str = "rrtstar"
    budget_s: float = 30.0
    checks_per_second: float = 40000.0
    weight: float = 1.0
    resolution: float = 0.05
    seed: int = 0
    # sampling
    goal_bias: float = 0.1
    mode_sampler: str = "frontier"
    post_solution_sampler: str = "uniform"
    informed: str = "local"  # local | global | off
    transition_budget: int = 50
    # tree growth
    steer_range: float = 1.5
    rewire_scale: float = 2.0 * math.e
    exit_pool_size: int = 8
    # roadmap growth
    config_batch: int = 40
    transition_batch: int = 5
    heuristic: str = "reverse"  # reverse | effort | none
    # emission
    shortcut: bool = True
    shortcut_params: ShortcutParams = field(default_factory=ShortcutParams)
    improvement_threshold: float = 1e-6
    # optional early exit: end the run once a recorded solution costs at most
    # this much (inf stops at the first solution); None runs out the budget
    stop_cost: float | None = None
    # prioritized baseline
    max_sequence_retries: int = 100_000
    robot_rrt_iters: int = 800
    goal_sample_tries: int = 25
    step_retries: int = 3

    def __post_init__(self):
        if self.kind not in PLANNER_KINDS:
            raise ValueError(f"unknown planner kind {self.kind!r}")
        if self.budget_s <= 0 or self.checks_per_second <= 0:
            raise ValueError("budget and check rate must be positive")
        if self.informed not in ("local", "global", "off"):
            raise ValueError("informed must be local, global, or off")
        if self.mode_sampler not in MODE_SAMPLER_PRESETS:
            raise ValueError(f"unknown mode sampler preset {self.mode_sampler!r}")
        if self.post_solution_sampler not in MODE_SAMPLER_PRESETS:
            raise ValueError(
                f"unknown mode sampler preset {self.post_solution_sampler!r}"
            )
        if self.heuristic not in ("reverse", "effort", "none"):
            raise ValueError("heuristic must be reverse, effort, or none")


@dataclass(eq=False)
class SolutionRecord:
    """One emitted improvement: virtual time, cost, and the path itself."""

    t: float
    cost: float
    path: TimedPath


@dataclass(eq=False)
class RunResult:
    solutions: list[SolutionRecord]
    checks: int
    elapsed: float

    @property
    def solved(self) -> bool:
        return bool(self.solutions)

    @property
    def best(self) -> SolutionRecord | None:
        return self.solutions[-1] if self.solutions else None


class BasePlanner:
    """Common state: the mode graph, the RNG, the incumbent, and emission."""

    def __init__(
        self,
        space: CompositeSpace,
        ordering: OrderingGraph,
        start: State,
        config: PlannerConfig,
    ):
        if not space.scene.within_limits(start.q):
            raise ValueError("start configuration violates joint limits")
        self.space = space
        self.ordering = ordering
        self.config = config
        self.start = State(np.array(start.q, dtype=float), start.mode)
        self.rng = np.random.default_rng(config.seed)
        self.graph = ModeGraph(ordering, start.mode)
        self.solutions: list[SolutionRecord] = []
        self.best_cost = math.inf
        self.incumbent: InformedContext | None = None

    @property
    def now(self) -> float:
        return self.space.checks / self.config.checks_per_second

    def out_of_budget(self) -> bool:
        return self.now >= self.config.budget_s

    def mode_params(self):
        name = (
            self.config.mode_sampler
            if not self.solutions
            else self.config.post_solution_sampler
        )
        return MODE_SAMPLER_PRESETS[name]

    def emit_path(self, path: TimedPath) -> bool:
        """Shortcut, validate, and record a candidate if it improves on the
        best emitted cost by the relative threshold.  Candidates that fail
        independent validation are dropped; emission never trusts the
        search bookkeeping."""
        if self.config.shortcut:
            path = partial_shortcut(self.space, path, self.rng, self.config.shortcut_params)
        cost = path.cost(self.space)
        if self.solutions and cost >= self.best_cost * (
            1.0 - self.config.improvement_threshold
        ):
            return False
        if validate_timed_path(self.space, self.ordering, path, self.start):
            return False
        self.solutions.append(SolutionRecord(self.now, cost, path))
        self.best_cost = cost
        self.incumbent = InformedContext.from_path(self.space, path)
        if self.config.stop_cost is not None and cost <= self.config.stop_cost:
            raise PlannerStop
        return True

    def try_emit(self, states: list[State]) -> bool:
        return self.emit_path(time_parameterize(self.space, states))

    def result(self) -> RunResult:
        return RunResult(list(self.solutions), self.space.checks, self.now)

    def solve(self) -> RunResult:
        raise NotImplementedError
