"""Benchmark harness: scenario files, the run grid, summaries, and rendering."""

from .scenario import (
    Scenario,
    ScenarioError,
    bundled_scenario_path,
    list_bundled_scenarios,
    load_scenario,
    serialize_scenario,
)
from .runner import RunRecord, run_benchmark, run_single
from .summarize import median_ci, summarize, write_csv
from .render import render_path_svg

__all__ = [
    "Scenario",
    "ScenarioError",
    "bundled_scenario_path",
    "list_bundled_scenarios",
    "load_scenario",
    "serialize_scenario",
    "RunRecord",
    "run_benchmark",
    "run_single",
    "median_ci",
    "summarize",
    "write_csv",
    "render_path_svg",
]
