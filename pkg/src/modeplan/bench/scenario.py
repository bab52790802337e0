"""Scenario files: a small versioned JSON schema for planar multi-robot
multi-goal problems, plus loading, validation, and serialization.

A scenario document is plain data so the corpus can be read and edited by
hand.  ``load_scenario`` turns a document into live scene/ordering/start
objects and checks the structural invariants; every complaint names the
JSON path it came from (``robots[1].start``, ``ordering.edges[2]``, ...).

Schema, version 1::

    {
      "version": 1,
      "name": "hallway",
      "bounds": [xlo, xhi, ylo, yhi],          # workspace, used for rendering
      "robots": [
        {"name": "r1", "kind": "disk",         # or "disk_heading"
         "radius": 0.3,
         "limits": [[xlo, xhi], [ylo, yhi]],   # + [th_lo, th_hi] for heading
         "start": [x, y],                      # + theta for heading
         "ee_offset": [x, y, theta]}           # optional gripper frame
      ],
      "statics": [{"shape": SHAPE, "pose": [x, y, theta]}],
      "movables": [
        {"name": "o1", "shape": SHAPE, "pose": [x, y, theta],
         "grasps": [{"anchor": [x, y], "approach": theta-or-null}]}
      ],
      "tasks": [
        {"name": "a", "robots": ["r1"], "goal": GOAL, "pool": false}
      ],
      "ordering": {"form": "sequence", "sequence": ["a", "b", "fin"]}
               or {"form": "partial" | "pool",
                   "edges": [["a", "fin"]], "terminal": "fin"},
      "cost_weight": 1.0,
      "budget_s": 30.0,
      "resolution": 0.05,
      "known_optimum": {"cost": 12.0, "note": "sum of straight lines"}
    }

    SHAPE: {"type": "circle", "radius": r}
         | {"type": "box", "half_x": hx, "half_y": hy}
    GOAL:  {"type": "pose", "configs": {"r1": [x, y, ...]}}
         | {"type": "region", "boxes": {"r1": [[lo, hi], ...]}}
         | {"type": "grasp", "object": "o1"}
         | {"type": "place", "object": "o1", "pose": [x, y, theta]}
         | {"type": "handover", "object": "o1", "giver": "r1",
            "receiver": "r2", "region": [[xlo, xhi], [ylo, yhi]]}  # optional

For ``partial`` and ``pool`` forms, any non-terminal task with no outgoing
edge is implicitly ordered before the terminal task, so small documents can
omit the obvious final fan-in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..geom2d import AxisBox, Circle, Pose2
from ..scene import GraspSpec, MovableObject, SceneGraph, disk_robot
from ..space import CompositeSpace, CostParams, State
from ..tasks import (
    GraspGoal,
    HandoverGoal,
    ObjectPose,
    OrderingError,
    OrderingGraph,
    PlaceGoal,
    PoseGoal,
    RegionGoal,
    Task,
    WORLD,
    initial_mode,
)

SCHEMA_VERSION = 1

ROBOT_KINDS = ("disk", "disk_heading")


class ScenarioError(ValueError):
    """A scenario document failed to load; ``path`` names the bad field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class Scenario:
    """A loaded problem: world pieces plus benchmark defaults.

    ``make_space`` builds a fresh collision-counting space per run so the
    virtual clock always starts at zero.
    """

    name: str
    scene: SceneGraph
    ordering: OrderingGraph
    start: State
    cost_weight: float
    budget_s: float
    resolution: float
    known_optimum: float | None
    optimum_note: str | None

    def make_space(
        self, weight: float | None = None, resolution: float | None = None
    ) -> CompositeSpace:
        w = self.cost_weight if weight is None else weight
        res = self.resolution if resolution is None else resolution
        return CompositeSpace(self.scene, CostParams(w), res)


# ---------------------------------------------------------------------------
# low-level document access


def _req(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise ScenarioError(path, f"expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise ScenarioError(path, f"missing required field {key!r}")
    return doc[key]


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ScenarioError(path, f"expected a finite number, got {v!r}")
    return float(v)


def _string(v, path: str) -> str:
    if not isinstance(v, str) or not v:
        raise ScenarioError(path, f"expected a non-empty string, got {v!r}")
    return v


def _floats(v, path: str, n: int | None = None) -> tuple[float, ...]:
    if not isinstance(v, (list, tuple)):
        raise ScenarioError(path, f"expected an array of numbers, got {v!r}")
    out = tuple(_number(x, f"{path}[{i}]") for i, x in enumerate(v))
    if n is not None and len(out) != n:
        raise ScenarioError(path, f"expected {n} numbers, got {len(out)}")
    return out


def _interval(v, path: str) -> tuple[float, float]:
    lo, hi = _floats(v, path, 2)
    if lo >= hi:
        raise ScenarioError(path, f"empty interval [{lo}, {hi}]")
    return lo, hi


# ---------------------------------------------------------------------------
# shapes, poses, goals


def _parse_shape(doc, path: str):
    kind = _string(_req(doc, "type", path), f"{path}.type")
    if kind == "circle":
        r = _number(_req(doc, "radius", path), f"{path}.radius")
        if r <= 0:
            raise ScenarioError(f"{path}.radius", "radius must be positive")
        return Circle(r)
    if kind == "box":
        hx = _number(_req(doc, "half_x", path), f"{path}.half_x")
        hy = _number(_req(doc, "half_y", path), f"{path}.half_y")
        if hx <= 0 or hy <= 0:
            raise ScenarioError(path, "box half extents must be positive")
        return AxisBox(hx, hy)
    raise ScenarioError(f"{path}.type", f"unknown shape type {kind!r}")


def _shape_doc(shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": shape.radius}
    if isinstance(shape, AxisBox):
        return {"type": "box", "half_x": shape.half_x, "half_y": shape.half_y}
    raise TypeError(f"unserializable shape {shape!r}")


def _parse_pose(v, path: str) -> Pose2:
    vals = _floats(v, path)
    if len(vals) == 2:
        return Pose2(vals[0], vals[1], 0.0)
    if len(vals) == 3:
        return Pose2(*vals)
    raise ScenarioError(path, f"expected [x, y] or [x, y, theta], got {len(vals)} numbers")


def _parse_goal(doc, path: str, robot_names: set[str], movable_names: set[str]):
    kind = _string(_req(doc, "type", path), f"{path}.type")
    if kind == "pose":
        configs = _req(doc, "configs", path)
        if not isinstance(configs, dict) or not configs:
            raise ScenarioError(f"{path}.configs", "expected a robot -> config map")
        entries = []
        for rid, cfg in configs.items():
            if rid not in robot_names:
                raise ScenarioError(f"{path}.configs.{rid}", "unknown robot")
            entries.append((rid, _floats(cfg, f"{path}.configs.{rid}")))
        return PoseGoal(tuple(entries))
    if kind == "region":
        boxes = _req(doc, "boxes", path)
        if not isinstance(boxes, dict) or not boxes:
            raise ScenarioError(f"{path}.boxes", "expected a robot -> box map")
        entries = []
        for rid, box in boxes.items():
            if rid not in robot_names:
                raise ScenarioError(f"{path}.boxes.{rid}", "unknown robot")
            if not isinstance(box, (list, tuple)) or not box:
                raise ScenarioError(f"{path}.boxes.{rid}", "expected per-axis intervals")
            ivs = tuple(
                _interval(iv, f"{path}.boxes.{rid}[{i}]") for i, iv in enumerate(box)
            )
            entries.append((rid, ivs))
        return RegionGoal(tuple(entries))
    if kind == "grasp":
        obj = _string(_req(doc, "object", path), f"{path}.object")
        if obj not in movable_names:
            raise ScenarioError(f"{path}.object", f"unknown movable {obj!r}")
        return GraspGoal(obj)
    if kind == "place":
        obj = _string(_req(doc, "object", path), f"{path}.object")
        if obj not in movable_names:
            raise ScenarioError(f"{path}.object", f"unknown movable {obj!r}")
        pose = _floats(_req(doc, "pose", path), f"{path}.pose", 3)
        return PlaceGoal(obj, pose)
    if kind == "handover":
        obj = _string(_req(doc, "object", path), f"{path}.object")
        if obj not in movable_names:
            raise ScenarioError(f"{path}.object", f"unknown movable {obj!r}")
        giver = _string(_req(doc, "giver", path), f"{path}.giver")
        receiver = _string(_req(doc, "receiver", path), f"{path}.receiver")
        for rid, key in ((giver, "giver"), (receiver, "receiver")):
            if rid not in robot_names:
                raise ScenarioError(f"{path}.{key}", f"unknown robot {rid!r}")
        if giver == receiver:
            raise ScenarioError(path, "giver and receiver must differ")
        region = None
        rd = doc.get("region")
        if rd is not None:
            if not isinstance(rd, (list, tuple)) or len(rd) != 2:
                raise ScenarioError(f"{path}.region", "expected [[xlo,xhi],[ylo,yhi]]")
            region = (
                _interval(rd[0], f"{path}.region[0]"),
                _interval(rd[1], f"{path}.region[1]"),
            )
        return HandoverGoal(obj, giver, receiver, region)
    raise ScenarioError(f"{path}.type", f"unknown goal type {kind!r}")


def _goal_doc(goal) -> dict:
    if isinstance(goal, PoseGoal):
        return {
            "type": "pose",
            "configs": {rid: list(cfg) for rid, cfg in goal.configs},
        }
    if isinstance(goal, RegionGoal):
        return {
            "type": "region",
            "boxes": {rid: [list(iv) for iv in box] for rid, box in goal.boxes},
        }
    if isinstance(goal, GraspGoal):
        return {"type": "grasp", "object": goal.obj}
    if isinstance(goal, PlaceGoal):
        return {"type": "place", "object": goal.obj, "pose": list(goal.pose)}
    if isinstance(goal, HandoverGoal):
        out = {
            "type": "handover",
            "object": goal.obj,
            "giver": goal.giver,
            "receiver": goal.receiver,
        }
        if goal.region is not None:
            out["region"] = [list(iv) for iv in goal.region]
        return out
    raise TypeError(f"unserializable goal {goal!r}")


# ---------------------------------------------------------------------------
# loading


def load_scenario(source: str | Path | dict) -> Scenario:
    """Parse, build, and validate a scenario.

    ``source`` is a path to a JSON file or an already-decoded document.
    Raises :class:`ScenarioError` with the offending JSON path on any
    schema violation, invalid ordering, or infeasible start state.
    """
    if isinstance(source, dict):
        doc = source
    else:
        p = Path(source)
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ScenarioError(str(p), f"not valid JSON: {e}") from e
        if not isinstance(doc, dict):
            raise ScenarioError(str(p), "top level must be a JSON object")

    version = _req(doc, "version", "$")
    if version != SCHEMA_VERSION:
        raise ScenarioError("version", f"unsupported schema version {version!r}")
    name = _string(_req(doc, "name", "$"), "name")

    bounds = tuple(_floats(_req(doc, "bounds", "$"), "bounds", 4))
    if bounds[0] >= bounds[1] or bounds[2] >= bounds[3]:
        raise ScenarioError("bounds", f"degenerate workspace {bounds}")

    # robots
    robots_doc = _req(doc, "robots", "$")
    if not isinstance(robots_doc, list) or not robots_doc:
        raise ScenarioError("robots", "expected a non-empty array")
    robots = []
    starts = []
    for i, rd in enumerate(robots_doc):
        rp = f"robots[{i}]"
        rid = _string(_req(rd, "name", rp), f"{rp}.name")
        kind = _string(_req(rd, "kind", rp), f"{rp}.kind")
        if kind not in ROBOT_KINDS:
            raise ScenarioError(f"{rp}.kind", f"unknown robot kind {kind!r}")
        heading = kind == "disk_heading"
        radius = _number(_req(rd, "radius", rp), f"{rp}.radius")
        if radius <= 0:
            raise ScenarioError(f"{rp}.radius", "radius must be positive")
        limits_doc = _req(rd, "limits", rp)
        want = 3 if heading else 2
        if not isinstance(limits_doc, list) or len(limits_doc) != want:
            raise ScenarioError(
                f"{rp}.limits", f"{kind} robots take {want} limit intervals"
            )
        limits = tuple(
            _interval(iv, f"{rp}.limits[{j}]") for j, iv in enumerate(limits_doc)
        )
        start = _floats(_req(rd, "start", rp), f"{rp}.start", want)
        ee = rd.get("ee_offset")
        ee_offset = _parse_pose(ee, f"{rp}.ee_offset") if ee is not None else None
        robots.append(disk_robot(rid, radius, limits, ee_offset=ee_offset, heading=heading))
        starts.append(start)
    robot_names = [r.id for r in robots]
    if len(set(robot_names)) != len(robot_names):
        raise ScenarioError("robots", "duplicate robot names")

    # statics
    statics = []
    for i, sd in enumerate(doc.get("statics", [])):
        sp = f"statics[{i}]"
        shape = _parse_shape(_req(sd, "shape", sp), f"{sp}.shape")
        pose = _parse_pose(_req(sd, "pose", sp), f"{sp}.pose")
        statics.append((shape, pose))

    # movables
    movables = []
    object_poses = []
    for i, md in enumerate(doc.get("movables", [])):
        mp = f"movables[{i}]"
        oid = _string(_req(md, "name", mp), f"{mp}.name")
        shape = _parse_shape(_req(md, "shape", mp), f"{mp}.shape")
        pose = _parse_pose(_req(md, "pose", mp), f"{mp}.pose")
        grasps = []
        for j, gd in enumerate(md.get("grasps", [])):
            gp = f"{mp}.grasps[{j}]"
            anchor = _floats(_req(gd, "anchor", gp), f"{gp}.anchor", 2)
            approach = gd.get("approach")
            if approach is not None:
                approach = _number(approach, f"{gp}.approach")
            grasps.append(GraspSpec(anchor=anchor, approach=approach))
        movables.append(MovableObject(oid, shape, tuple(grasps)))
        object_poses.append(ObjectPose(oid, WORLD, pose.x, pose.y, pose.theta))
    movable_names = [m.id for m in movables]
    if len(set(movable_names)) != len(movable_names):
        raise ScenarioError("movables", "duplicate movable names")

    # tasks
    tasks_doc = _req(doc, "tasks", "$")
    if not isinstance(tasks_doc, list) or not tasks_doc:
        raise ScenarioError("tasks", "expected a non-empty array")
    tasks = []
    for i, td in enumerate(tasks_doc):
        tp = f"tasks[{i}]"
        tid = _string(_req(td, "name", tp), f"{tp}.name")
        execs = _req(td, "robots", tp)
        if not isinstance(execs, list) or not execs:
            raise ScenarioError(f"{tp}.robots", "expected a non-empty array")
        for rid in execs:
            if rid not in robot_names:
                raise ScenarioError(f"{tp}.robots", f"unknown robot {rid!r}")
        goal = _parse_goal(
            _req(td, "goal", tp), f"{tp}.goal", set(robot_names), set(movable_names)
        )
        pool = bool(td.get("pool", False))
        tasks.append(Task(tid, tuple(execs), goal, pool=pool))
    task_names = [t.id for t in tasks]

    # ordering
    od = _req(doc, "ordering", "$")
    form = _string(_req(od, "form", "ordering"), "ordering.form")
    if form not in ("sequence", "partial", "pool"):
        raise ScenarioError("ordering.form", f"unknown form {form!r}")
    if form == "sequence":
        seq = _req(od, "sequence", "ordering")
        if not isinstance(seq, list) or len(seq) != len(tasks):
            raise ScenarioError(
                "ordering.sequence", "must list every task exactly once"
            )
        for j, tid in enumerate(seq):
            if tid not in task_names:
                raise ScenarioError(f"ordering.sequence[{j}]", f"unknown task {tid!r}")
        if sorted(seq) != sorted(task_names):
            raise ScenarioError("ordering.sequence", "must list every task exactly once")
        edges = tuple((seq[j], seq[j + 1]) for j in range(len(seq) - 1))
        terminal = seq[-1]
    else:
        edges_doc = od.get("edges", [])
        edges = []
        for j, e in enumerate(edges_doc):
            ep = f"ordering.edges[{j}]"
            if not isinstance(e, (list, tuple)) or len(e) != 2:
                raise ScenarioError(ep, "expected [before, after]")
            a, b = e
            for tid in (a, b):
                if tid not in task_names:
                    raise ScenarioError(ep, f"unknown task {tid!r}")
            edges.append((a, b))
        terminal = _string(_req(od, "terminal", "ordering"), "ordering.terminal")
        if terminal not in task_names:
            raise ScenarioError("ordering.terminal", f"unknown task {terminal!r}")
        # implicit fan-in: tasks with nothing after them precede the terminal
        has_out = {a for a, _ in edges}
        for tid in task_names:
            if tid != terminal and tid not in has_out:
                edges.append((tid, terminal))
        edges = tuple(edges)

    try:
        ordering = OrderingGraph(tuple(robot_names), tuple(tasks), edges, terminal, form)
    except OrderingError as e:
        raise ScenarioError("ordering", str(e)) from e

    # scalars
    cost_weight = _number(doc.get("cost_weight", 1.0), "cost_weight")
    if not 0.0 < cost_weight <= 1.0:
        raise ScenarioError("cost_weight", f"must lie in (0, 1], got {cost_weight}")
    budget_s = _number(doc.get("budget_s", 30.0), "budget_s")
    if budget_s <= 0:
        raise ScenarioError("budget_s", "must be positive")
    resolution = _number(doc.get("resolution", 0.05), "resolution")
    if resolution <= 0:
        raise ScenarioError("resolution", "must be positive")
    known_optimum = None
    optimum_note = None
    if doc.get("known_optimum") is not None:
        ko = doc["known_optimum"]
        known_optimum = _number(_req(ko, "cost", "known_optimum"), "known_optimum.cost")
        optimum_note = _string(_req(ko, "note", "known_optimum"), "known_optimum.note")

    # assemble and validate the start state
    scene = SceneGraph(robots, statics, movables, bounds)
    q0 = np.concatenate([np.asarray(s, dtype=float) for s in starts])
    mode0 = initial_mode(ordering, tuple(object_poses))
    if not scene.within_limits(q0):
        raise ScenarioError("robots", "a start configuration violates its limits")
    if not scene.world_collision_free(q0, mode0):
        raise ScenarioError("robots", "start configurations are in collision")
    start = State(q0, mode0)

    return Scenario(
        name=name,
        scene=scene,
        ordering=ordering,
        start=start,
        cost_weight=cost_weight,
        budget_s=budget_s,
        resolution=resolution,
        known_optimum=known_optimum,
        optimum_note=optimum_note,
    )


def _sequence_from_edges(edges, terminal) -> list[str]:
    nxt = dict(edges)
    prev = {b: a for a, b in edges}
    first = terminal
    while first in prev:
        first = prev[first]
    seq = [first]
    while seq[-1] in nxt:
        seq.append(nxt[seq[-1]])
    return seq


def serialize_scenario(sc: Scenario) -> dict:
    """Canonical document for a loaded scenario; ``load_scenario`` accepts
    the result and reconstructs a structurally identical problem."""
    scene = sc.scene
    ordering = sc.ordering
    robots_out = []
    for i, r in enumerate(scene.robots):
        sl = scene.robot_slice(i)
        entry = {
            "name": r.id,
            "kind": "disk_heading" if len(r.limits) == 3 else "disk",
            "radius": r.bodies[0][1].radius,
            "limits": [list(iv) for iv in r.limits],
            "start": [float(v) for v in sc.start.q[sl]],
        }
        ee = r.ee_offset
        if (ee.x, ee.y, ee.theta) != (0.0, 0.0, 0.0):
            entry["ee_offset"] = [ee.x, ee.y, ee.theta]
        robots_out.append(entry)
    initial_poses = {op.obj: op for op in sc.start.mode.object_poses}
    out = {
        "version": SCHEMA_VERSION,
        "name": sc.name,
        "bounds": list(scene.bounds),
        "robots": robots_out,
        "statics": [
            {"shape": _shape_doc(shape), "pose": [pose.x, pose.y, pose.theta]}
            for shape, pose in scene.statics
        ],
        "movables": [
            {
                "name": m.id,
                "shape": _shape_doc(m.shape),
                "pose": [
                    initial_poses[m.id].x,
                    initial_poses[m.id].y,
                    initial_poses[m.id].theta,
                ],
                "grasps": [
                    {"anchor": list(g.anchor), "approach": g.approach}
                    for g in m.grasps
                ],
            }
            for m in scene.movables
        ],
        "tasks": [
            {
                "name": t.id,
                "robots": list(t.robots),
                "goal": _goal_doc(t.goal),
                **({"pool": True} if t.pool else {}),
            }
            for t in ordering.tasks
        ],
        "ordering": (
            {
                "form": "sequence",
                "sequence": _sequence_from_edges(ordering.edges, ordering.terminal),
            }
            if ordering.form == "sequence"
            else {
                "form": ordering.form,
                "edges": [list(e) for e in ordering.edges],
                "terminal": ordering.terminal,
            }
        ),
        "cost_weight": sc.cost_weight,
        "budget_s": sc.budget_s,
        "resolution": sc.resolution,
    }
    if sc.known_optimum is not None:
        out["known_optimum"] = {"cost": sc.known_optimum, "note": sc.optimum_note}
    return json.loads(json.dumps(out))


# ---------------------------------------------------------------------------
# bundled corpus


def list_bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(__package__) / "scenarios"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a bundled scenario by bare name."""
    root = resources.files(__package__) / "scenarios"
    p = root / f"{name}.json"
    if not p.is_file():
        known = ", ".join(list_bundled_scenarios())
        raise ScenarioError(name, f"no bundled scenario named {name!r} (have: {known})")
    return Path(str(p))
