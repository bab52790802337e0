"""Benchmark execution: a (scenario, planner, seed) grid in, one JSON-lines
record per run out.

Runs are deterministic: the planners spend a virtual budget counted in
collision checks, so a record depends only on its triple and the config
overrides, never on the host machine.  The runner streams records through a
single writer, one JSON object per line.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable

from ..planners import PlannerConfig, make_planner
from ..space import TimedPath
from .scenario import Scenario


@dataclass
class RunRecord:
    """Everything observable about one run, minus the paths themselves."""

    scenario: str
    planner: str
    seed: int
    events: list[tuple[float, float]]  # (virtual seconds, cost) per improvement
    budget_s: float
    config: dict
    path_file: str | None = None
    error: str | None = None

    @property
    def first_solution_t(self) -> float | None:
        return self.events[0][0] if self.events else None

    @property
    def final_cost(self) -> float | None:
        return self.events[-1][1] if self.events else None

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "planner": self.planner,
            "seed": self.seed,
            "events": [{"t": t, "cost": c} for t, c in self.events],
            "budget_s": self.budget_s,
            "config": self.config,
        }
        if self.path_file is not None:
            doc["path_file"] = self.path_file
        if self.error is not None:
            doc["error"] = self.error
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "RunRecord":
        doc = json.loads(line)
        return RunRecord(
            scenario=doc["scenario"],
            planner=doc["planner"],
            seed=int(doc["seed"]),
            events=[(float(e["t"]), float(e["cost"])) for e in doc["events"]],
            budget_s=float(doc["budget_s"]),
            config=doc.get("config", {}),
            path_file=doc.get("path_file"),
            error=doc.get("error"),
        )


def build_config(
    scenario: Scenario, kind: str, seed: int, overrides: dict | None = None
) -> PlannerConfig:
    """Planner configuration for one run: scenario defaults, then overrides."""
    fields = {
        "kind": kind,
        "seed": seed,
        "budget_s": scenario.budget_s,
        "weight": scenario.cost_weight,
        "resolution": scenario.resolution,
    }
    if overrides:
        fields.update(overrides)
    return PlannerConfig(**fields)


def run_single(
    scenario: Scenario, kind: str, seed: int, overrides: dict | None = None
) -> tuple[RunRecord, TimedPath | None]:
    """Execute one run; returns its record and the final path, if any.

    Planner exceptions are not propagated: the record comes back with an
    empty event list and the error message, so a long grid survives one
    bad run.
    """
    config = build_config(scenario, kind, seed, overrides)
    space = scenario.make_space(weight=config.weight, resolution=config.resolution)
    config_doc = asdict(config)
    try:
        planner = make_planner(space, scenario.ordering, scenario.start, config)
        result = planner.solve()
    except Exception as e:  # noqa: BLE001 - per-run isolation is the contract
        record = RunRecord(
            scenario=scenario.name,
            planner=kind,
            seed=seed,
            events=[],
            budget_s=config.budget_s,
            config=config_doc,
            error=f"{type(e).__name__}: {e}",
        )
        return record, None
    events = [(s.t, s.cost) for s in result.solutions]
    for (t0, c0), (t1, c1) in zip(events, events[1:]):
        assert t1 >= t0 and c1 < c0, "emission gate must keep events monotone"
    record = RunRecord(
        scenario=scenario.name,
        planner=kind,
        seed=seed,
        events=events,
        budget_s=config.budget_s,
        config=config_doc,
    )
    best = result.best
    return record, best.path if best else None


def path_doc(scenario: Scenario, kind: str, seed: int, path: TimedPath) -> dict:
    """JSON document for a final path (enough to render it later)."""
    return {
        "scenario": scenario.name,
        "planner": kind,
        "seed": seed,
        "times": [float(t) for t in path.times],
        "configs": [[float(v) for v in row] for row in path.configs],
    }


def run_benchmark(
    scenarios: Iterable[Scenario],
    kinds: Iterable[str],
    seeds: Iterable[int],
    overrides: dict | None = None,
    out_path: str | Path | None = None,
    paths_dir: str | Path | None = None,
    log: Callable[[str], None] | None = None,
) -> list[RunRecord]:
    """Run the full grid and return the records in grid order.

    ``out_path`` appends one JSON line per record as runs finish.
    ``paths_dir`` saves each run's best path as a small JSON file and
    points the record at it.
    """
    scenarios = list(scenarios)
    kinds = list(kinds)
    seeds = list(seeds)
    if not scenarios or not kinds or not seeds:
        raise ValueError("need at least one scenario, planner kind, and seed")
    if paths_dir is not None:
        paths_dir = Path(paths_dir)
        paths_dir.mkdir(parents=True, exist_ok=True)
    writer = None
    if out_path is not None:
        writer = open(out_path, "w")
    records = []
    try:
        for sc in scenarios:
            for kind in kinds:
                for seed in seeds:
                    record, path = run_single(sc, kind, seed, overrides)
                    if paths_dir is not None and path is not None:
                        fname = f"{sc.name}_{kind}_{seed}.json"
                        (paths_dir / fname).write_text(
                            json.dumps(path_doc(sc, kind, seed, path))
                        )
                        record.path_file = fname
                    records.append(record)
                    if writer is not None:
                        writer.write(record.to_json() + "\n")
                        writer.flush()
                    if log is not None:
                        n = len(record.events)
                        tail = (
                            f"cost {record.events[-1][1]:.3f} after {n} improvements"
                            if n
                            else ("error: " + record.error if record.error else "no solution")
                        )
                        log(f"{sc.name} / {kind} / seed {seed}: {tail}")
    finally:
        if writer is not None:
            writer.close()
    return records


def load_records(path: str | Path) -> list[RunRecord]:
    """Read a JSON-lines record file written by :func:`run_benchmark`."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RunRecord.from_json(line))
    return out
