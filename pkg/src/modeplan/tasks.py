"""Task orderings, modes, and the assignment oracle.

A mode captures the discrete half of a planning state: which task every robot
is working on, which tasks are done, and where every movable object currently
lives (parent frame plus relative pose). The oracle enumerates the successor
assignments reachable from a mode by completing exactly one active task.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .geom2d import Pose2, wrap_angle

WORLD = "world"

# dedup grid for object pose signatures (meters / radians)
POSE_QUANT = 1e-6


# ---------------------------------------------------------------------------
# goal constraints (pure data; evaluation lives with the scene)


@dataclass(frozen=True)
class PoseGoal:
    """Exact target configuration per constrained robot."""

    configs: tuple[tuple[str, tuple[float, ...]], ...]

    def robots(self) -> tuple[str, ...]:
        return tuple(r for r, _ in self.configs)


@dataclass(frozen=True)
class RegionGoal:
    """Per-robot axis-aligned box in that robot's configuration space."""

    boxes: tuple[tuple[str, tuple[tuple[float, float], ...]], ...]

    def robots(self) -> tuple[str, ...]:
        return tuple(r for r, _ in self.boxes)


@dataclass(frozen=True)
class GraspGoal:
    """Executor's gripper reaches one of the object's grasp entries."""

    obj: str


@dataclass(frozen=True)
class PlaceGoal:
    """Held object is released at an exact world pose."""

    obj: str
    pose: tuple[float, float, float]


@dataclass(frozen=True)
class HandoverGoal:
    """Giver and receiver gripper points coincide; the object changes hands."""

    obj: str
    giver: str
    receiver: str
    region: tuple[tuple[float, float], tuple[float, float]] | None = None


Goal = PoseGoal | RegionGoal | GraspGoal | PlaceGoal | HandoverGoal


@dataclass(frozen=True)
class Task:
    """One unit of work. `robots` are the executors, or the candidate set
    when pool is True (exactly one candidate ends up executing)."""

    id: str
    robots: tuple[str, ...]
    goal: Goal
    pool: bool = False

    @property
    def post_kind(self) -> str | None:
        """Scene-graph edit performed when the task completes."""
        if isinstance(self.goal, GraspGoal):
            return "grasp"
        if isinstance(self.goal, PlaceGoal):
            return "place"
        if isinstance(self.goal, HandoverGoal):
            return "handover"
        return None


@dataclass(frozen=True)
class ObjectPose:
    """Pose of a movable object relative to its parent frame."""

    obj: str
    parent: str  # WORLD or a robot id (attached to that robot's gripper)
    x: float
    y: float
    theta: float

    def rel_pose(self) -> Pose2:
        return Pose2(self.x, self.y, self.theta)


def _quant(v: float) -> int:
    return int(round(v / POSE_QUANT))


@dataclass(frozen=True, eq=False)
class Mode:
    """Discrete planning state: active tasks, completed set, object placement.

    Equality and hashing use the assignment plus a quantized object-pose
    signature, so two modes reached through different histories merge when
    they describe the same world.
    """

    assignment: tuple[str | None, ...]
    completed: frozenset[str]
    object_poses: tuple[ObjectPose, ...]

    def __post_init__(self):
        sig = (
            self.assignment,
            tuple(
                (op.obj, op.parent, _quant(op.x), _quant(op.y), _quant(wrap_angle(op.theta)))
                for op in self.object_poses
            ),
        )
        object.__setattr__(self, "_sig", sig)

    @property
    def signature(self):
        return self._sig

    def __eq__(self, other):
        return isinstance(other, Mode) and self._sig == other._sig

    def __hash__(self):
        return hash(self._sig)

    def object_parent(self, obj: str) -> str:
        for op in self.object_poses:
            if op.obj == obj:
                return op.parent
        raise KeyError(obj)

    def object_pose(self, obj: str) -> ObjectPose:
        for op in self.object_poses:
            if op.obj == obj:
                return op
        raise KeyError(obj)

    def replace_object(self, obj: str, parent: str, rel: Pose2) -> tuple[ObjectPose, ...]:
        out = []
        for op in self.object_poses:
            if op.obj == obj:
                out.append(ObjectPose(obj, parent, rel.x, rel.y, wrap_angle(rel.theta)))
            else:
                out.append(op)
        return tuple(out)

    def __repr__(self):
        done = ",".join(sorted(self.completed))
        return f"Mode(active={self.assignment}, done=[{done}])"


@dataclass(frozen=True)
class TransitionOption:
    """One oracle choice: the task that completes (None for the initial
    activation step) and the resulting per-robot assignment."""

    completed_task: str | None
    assignment: tuple[str | None, ...]


class OrderingError(ValueError):
    pass


@dataclass(frozen=True)
class OrderingGraph:
    """Precedence DAG over tasks, in one of three authoring forms:
    a fully assigned sequence, a partial order with fixed executors, or an
    unassigned pool with per-task candidate sets."""

    robots: tuple[str, ...]
    tasks: tuple[Task, ...]
    edges: tuple[tuple[str, str], ...]
    terminal: str
    form: str = "partial"  # "sequence" | "partial" | "pool"

    def __post_init__(self):
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise OrderingError("duplicate task ids")
        by_id = {t.id: t for t in self.tasks}
        if self.terminal not in by_id:
            raise OrderingError(f"terminal task {self.terminal!r} not defined")
        if set(by_id[self.terminal].robots) != set(self.robots):
            raise OrderingError("terminal task must involve every robot")
        for a, b in self.edges:
            if a not in by_id or b not in by_id:
                raise OrderingError(f"edge references unknown task: ({a}, {b})")
        for t in self.tasks:
            unknown = set(t.robots) - set(self.robots)
            if unknown:
                raise OrderingError(f"task {t.id} references unknown robots {sorted(unknown)}")
            if not t.robots:
                raise OrderingError(f"task {t.id} has no robots")
        preds: dict[str, set[str]] = {t.id: set() for t in self.tasks}
        succs: dict[str, set[str]] = {t.id: set() for t in self.tasks}
        for a, b in self.edges:
            preds[b].add(a)
            succs[a].add(b)
        # cycle check via Kahn's algorithm
        indeg = {k: len(v) for k, v in preds.items()}
        queue = [k for k in ids if indeg[k] == 0]
        seen = 0
        while queue:
            n = queue.pop()
            seen += 1
            for m in succs[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    queue.append(m)
        if seen != len(ids):
            raise OrderingError("ordering graph has a cycle")
        # the terminal must close the plan: every other task precedes it
        reach: set[str] = set()
        stack = list(preds[self.terminal])
        while stack:
            n = stack.pop()
            if n in reach:
                continue
            reach.add(n)
            stack.extend(preds[n])
        missing = set(ids) - reach - {self.terminal}
        if missing:
            raise OrderingError(
                f"tasks not ordered before the terminal task: {sorted(missing)}"
            )
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_preds", {k: frozenset(v) for k, v in preds.items()})

    def task(self, task_id: str) -> Task:
        return self._by_id[task_id]

    def preds(self, task_id: str) -> frozenset[str]:
        return self._preds[task_id]

    def robot_index(self, robot: str) -> int:
        return self.robots.index(robot)


def is_terminal(ordering: OrderingGraph, mode: Mode) -> bool:
    return ordering.terminal in mode.completed


def _activatable(
    ordering: OrderingGraph,
    robot: str,
    completed: frozenset[str],
    assignment: tuple[str | None, ...],
    freed: set[str],
    mode: Mode,
) -> list[str]:
    """Tasks `robot` may legally activate after `completed` is done."""
    out = []
    for t in ordering.tasks:
        if t.id in completed or robot not in t.robots:
            continue
        if not ordering.preds(t.id) <= completed:
            continue
        # a task already active on robots outside the freed set can only be
        # joined if it is a fixed multi-robot task
        holders = [
            r
            for r, a in zip(ordering.robots, assignment)
            if a == t.id and r not in freed and r != robot
        ]
        if holders and (t.pool or any(h not in t.robots for h in holders)):
            continue
        # attachment legality: these goals are unsatisfiable unless the
        # object is in the right hands, so activating them would deadlock
        goal = t.goal
        if isinstance(goal, PlaceGoal) and mode.object_parent(goal.obj) != robot:
            continue
        if isinstance(goal, HandoverGoal) and mode.object_parent(goal.obj) != goal.giver:
            continue
        if isinstance(goal, GraspGoal) and mode.object_parent(goal.obj) == robot:
            continue
        out.append(t.id)
    return out


def _fill_assignments(
    ordering: OrderingGraph,
    base: tuple[str | None, ...],
    freed: list[str],
    completed: frozenset[str],
    mode: Mode,
) -> list[tuple[str | None, ...]]:
    """All consistent ways the freed robots can pick up next tasks."""
    choice_lists: list[list[str | None]] = []
    for r in freed:
        opts = _activatable(ordering, r, completed, base, set(freed), mode)
        choice_lists.append(opts if opts else [None])
    out = []
    for combo in itertools.product(*choice_lists):
        by_task: dict[str, list[str]] = {}
        for r, t in zip(freed, combo):
            if t is not None:
                by_task.setdefault(t, []).append(r)
        ok = True
        for tid, takers in by_task.items():
            task = ordering.task(tid)
            if task.pool and len(takers) > 1:
                ok = False
                break
            if not set(takers) <= set(task.robots):
                ok = False
                break
        if not ok:
            continue
        new = list(base)
        for r, t in zip(freed, combo):
            new[ordering.robot_index(r)] = t
        out.append(tuple(new))
    return out


def oracle_next_assignments(ordering: OrderingGraph, mode: Mode) -> list[TransitionOption]:
    """Successor assignments reachable from `mode` by completing exactly one
    fully staffed active task (or, from an all-idle start, by the initial
    activation). Empty iff the mode is terminal or a dead end."""
    if is_terminal(ordering, mode):
        return []
    options: list[TransitionOption] = []
    if all(a is None for a in mode.assignment) and not mode.completed:
        freed = list(ordering.robots)
        for assignment in _fill_assignments(
            ordering, mode.assignment, freed, mode.completed, mode
        ):
            if assignment != mode.assignment:
                options.append(TransitionOption(None, assignment))
        return options
    active: list[str] = []
    for tid in dict.fromkeys(a for a in mode.assignment if a is not None):
        task = ordering.task(tid)
        group = {r for r, a in zip(ordering.robots, mode.assignment) if a == tid}
        # a task can complete only when its full executor group is on it
        if task.pool:
            if len(group) == 1:
                active.append(tid)
        elif group == set(task.robots):
            active.append(tid)
    for tid in active:
        task = ordering.task(tid)
        completed = mode.completed | {tid}
        group = [r for r, a in zip(ordering.robots, mode.assignment) if a == tid]
        idle = [
            r
            for r, a in zip(ordering.robots, mode.assignment)
            if a is None and r not in group
        ]
        freed = [r for r in ordering.robots if r in group or r in idle]
        base = tuple(None if r in freed else a for r, a in zip(ordering.robots, mode.assignment))
        # activation legality looks at object parents after this task's
        # scene edit, not before it
        post = Mode(base, frozenset(completed), _post_object_poses(ordering, mode, task))
        for assignment in _fill_assignments(ordering, base, freed, frozenset(completed), post):
            options.append(TransitionOption(tid, assignment))
    return options


def _post_object_poses(
    ordering: OrderingGraph, mode: Mode, task: Task
) -> tuple[ObjectPose, ...]:
    """Object parents after `task` completes; relative poses are symbolic
    placeholders, callers needing real poses recompute them from kinematics."""
    kind = task.post_kind
    if kind == "grasp":
        executor = next(r for r, a in zip(ordering.robots, mode.assignment) if a == task.id)
        return mode.replace_object(task.goal.obj, executor, Pose2.identity())
    if kind == "place":
        return mode.replace_object(task.goal.obj, WORLD, Pose2.identity())
    if kind == "handover":
        return mode.replace_object(task.goal.obj, task.goal.receiver, Pose2.identity())
    return mode.object_poses


def activation_child(mode: Mode, option: TransitionOption) -> Mode:
    """Successor mode for an option that completes no task (initial
    activation): assignments change, world state does not."""
    if option.completed_task is not None:
        raise ValueError("activation_child requires an activation option")
    return Mode(option.assignment, mode.completed, mode.object_poses)


def initial_mode(
    ordering: OrderingGraph, object_poses: tuple[ObjectPose, ...] = ()
) -> Mode:
    """Start mode: robots pick up their first tasks immediately when that
    choice is unique; otherwise they start idle and the first transition
    performs the activation."""
    idle = Mode(tuple(None for _ in ordering.robots), frozenset(), object_poses)
    options = oracle_next_assignments(ordering, idle)
    if len(options) == 1:
        return activation_child(idle, options[0])
    return idle


# ---------------------------------------------------------------------------
# sequence enumeration


def symbolic_step(mode: Mode, option: TransitionOption, ordering: OrderingGraph) -> Mode:
    """Advance assignment, completed set, and object parents; poses are
    irrelevant for sequencing so attached objects keep zeroed offsets."""
    if option.completed_task is None:
        return activation_child(mode, option)
    task = ordering.task(option.completed_task)
    poses = _post_object_poses(ordering, mode, task)
    return Mode(option.assignment, mode.completed | {task.id}, poses)


def enumerate_valid_sequences(
    ordering: OrderingGraph,
    rng,
    max_count: int = 1000,
    start_mode: Mode | None = None,
) -> list[list[TransitionOption]]:
    """Task-assignment sequences from the start mode to terminal completion.

    Exhaustive when the total number of sequences is at most max_count,
    otherwise uniformly sampled without duplicates. Sequencing only needs
    object parent frames, so symbolic modes are used throughout.
    """
    if max_count <= 0:
        raise ValueError("max_count must be positive")
    if start_mode is None:
        start_mode = initial_mode(ordering)

    counts: dict = {}

    def count(mode: Mode) -> int:
        key = mode.signature + (mode.completed,)
        if key in counts:
            return counts[key]
        if is_terminal(ordering, mode):
            counts[key] = 1
            return 1
        total = 0
        for opt in oracle_next_assignments(ordering, mode):
            total += count(symbolic_step(mode, opt, ordering))
        counts[key] = total
        return total

    total = count(start_mode)
    if total == 0:
        return []
    if total <= max_count:
        out: list[list[TransitionOption]] = []

        def walk(mode: Mode, prefix: list[TransitionOption]):
            if is_terminal(ordering, mode):
                out.append(list(prefix))
                return
            for opt in oracle_next_assignments(ordering, mode):
                child = symbolic_step(mode, opt, ordering)
                if count(child) == 0:
                    continue
                prefix.append(opt)
                walk(child, prefix)
                prefix.pop()

        walk(start_mode, [])
        return out

    # sample sequences uniformly: pick each option proportionally to the
    # number of completions below it
    seen: set[tuple] = set()
    out = []
    attempts = 0
    while len(out) < max_count and attempts < max_count * 50:
        attempts += 1
        mode = start_mode
        seq: list[TransitionOption] = []
        while not is_terminal(ordering, mode):
            opts = oracle_next_assignments(ordering, mode)
            children = [symbolic_step(mode, o, ordering) for o in opts]
            weights = [count(c) for c in children]
            tot = sum(weights)
            pick = int(rng.integers(tot))
            acc = 0
            for opt, child, w in zip(opts, children, weights):
                acc += w
                if pick < acc:
                    seq.append(opt)
                    mode = child
                    break
        key = tuple((o.completed_task, o.assignment) for o in seq)
        if key not in seen:
            seen.add(key)
            out.append(seq)
    return out


# ---------------------------------------------------------------------------
# mode graph


class ModeGraph:
    """Reached modes plus frontier bookkeeping for mode sampling.

    `reached` holds every distinct mode seen so far; `frontier` holds the
    reached modes whose successor assignments have not all been reached yet;
    `latest` is the most recently added mode.
    """

    def __init__(self, ordering: OrderingGraph, start: Mode):
        self.ordering = ordering
        self.reached: list[Mode] = []
        self.frontier: list[Mode] = []
        self.interior: list[Mode] = []  # reached minus frontier
        self.latest: Mode = start
        self._index: dict = {}
        self._children: dict = {}
        self._options: dict = {}
        self._hit: dict = {}
        self._insert(start)

    def options(self, mode: Mode) -> list[TransitionOption]:
        sig = mode.signature
        if sig not in self._options:
            self._options[sig] = oracle_next_assignments(self.ordering, mode)
        return self._options[sig]

    def _insert(self, mode: Mode):
        sig = mode.signature
        self._index[sig] = mode
        self.reached.append(mode)
        self._children[sig] = []
        self._hit[sig] = set()
        if self.options(mode):
            self.frontier.append(mode)
        else:
            self.interior.append(mode)
        self.latest = mode

    def add(self, parent: Mode, child: Mode) -> Mode:
        """Record that `child` was reached from `parent`. Returns the
        canonical instance for the child's signature."""
        psig = parent.signature
        if psig not in self._index:
            raise ValueError("parent mode is not in the graph")
        opts = self.options(parent)
        match = [o for o in opts if o.assignment == child.assignment]
        if not match:
            raise ValueError(
                f"invalid parentage: {child!r} is not an oracle successor of {parent!r}"
            )
        canonical = self._index.get(child.signature)
        if canonical is None:
            self._insert(child)
            canonical = child
        if canonical not in self._children[psig]:
            self._children[psig].append(canonical)
        hit = self._hit[psig]
        hit.add(child.assignment)
        if len(hit) >= len({o.assignment for o in opts}):
            try:
                self.frontier.remove(parent)
                self.interior.append(parent)
            except ValueError:
                pass
        return canonical

    def children(self, mode: Mode) -> list[Mode]:
        return list(self._children.get(mode.signature, []))

    def canonical(self, mode: Mode) -> Mode:
        return self._index[mode.signature]

    def __contains__(self, mode: Mode) -> bool:
        return mode.signature in self._index

    def __len__(self) -> int:
        return len(self.reached)
