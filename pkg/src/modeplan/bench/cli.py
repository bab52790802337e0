"""Command line front end for the benchmark.

Subcommands:

  run        execute a (scenario x planner x seed) grid, JSON lines out
  summarize  turn a record file into per-planner cost-over-time CSV
  render     draw a scenario (optionally with a saved path) as SVG
  validate   check scenario files and report the first problem in each

Exit codes: 0 on success, 1 for usage errors, 2 when a scenario file
fails validation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..planners import PLANNER_KINDS
from ..sampling import MODE_SAMPLER_PRESETS, ModeSamplerParams
from .render import render_path_svg
from .runner import load_records, run_benchmark
from .scenario import (
    Scenario,
    ScenarioError,
    bundled_scenario_path,
    list_bundled_scenarios,
    load_scenario,
)
from .summarize import summarize, write_csv

USAGE_ERROR = 1
SCENARIO_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; the benchmark reserves 2
    for scenario validation, so usage problems are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _resolve_scenario(token: str) -> Scenario:
    """A scenario argument is either a bundled name or a file path."""
    if token in list_bundled_scenarios():
        return load_scenario(bundled_scenario_path(token))
    p = Path(token)
    if p.exists():
        return load_scenario(p)
    raise ScenarioError(
        token,
        "not a bundled scenario name or an existing file (bundled: %s)"
        % ", ".join(list_bundled_scenarios()),
    )


def _parse_seeds(text: str) -> list[int]:
    """Seed specs: a count ("20"), a range ("5:25"), or a list ("0,3,7")."""
    text = text.strip()
    if ":" in text:
        a, b = text.split(":", 1)
        lo, hi = int(a), int(b)
        if hi <= lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi))
    if "," in text:
        return [int(v) for v in text.split(",")]
    n = int(text)
    if n <= 0:
        raise ValueError("seed count must be positive")
    return list(range(n))


def build_parser() -> _Parser:
    parser = _Parser(prog="modeplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a benchmark grid")
    run.add_argument(
        "--scenario",
        action="append",
        default=None,
        help="bundled scenario name or JSON path (repeatable; default: all bundled)",
    )
    run.add_argument(
        "--planner",
        action="append",
        choices=PLANNER_KINDS,
        default=None,
        help="planner kind (repeatable; default: the three optimal planners)",
    )
    run.add_argument(
        "--seeds",
        default="1",
        help='"N" for seeds 0..N-1, "A:B" for a range, or "0,3,7" for a list',
    )
    run.add_argument("--budget", type=float, default=None, help="override budget (virtual s)")
    run.add_argument("--w", type=float, default=None, help="override cost weight in (0, 1]")
    run.add_argument("--resolution", type=float, default=None, help="override edge check spacing")
    run.add_argument(
        "--informed",
        choices=("local", "global", "off"),
        default=None,
        help="post-solution sampling focus (default: planner default)",
    )
    run.add_argument(
        "--shortcut",
        choices=("on", "off"),
        default=None,
        help="toggle path shortcutting before emission",
    )
    run.add_argument(
        "--mode-sampling",
        default=None,
        help="mode sampler preset: %s, or 'custom' with --p/--latest-share"
        % ", ".join(sorted(MODE_SAMPLER_PRESETS)),
    )
    run.add_argument("--p", type=float, default=None, help="custom preset: frontier bias in [0, 1]")
    run.add_argument(
        "--latest-share",
        type=float,
        default=None,
        help="custom preset: share of frontier draws going to the newest mode",
    )
    run.add_argument("--checks-per-second", type=float, default=None, help="virtual clock rate")
    run.add_argument(
        "--stop-cost",
        type=float,
        default=None,
        help="stop once cost reaches this value ('inf' stops at the first solution)",
    )
    run.add_argument("--out", default=None, help="JSON-lines record file to write")
    run.add_argument("--paths", default=None, help="directory for final path files")
    run.add_argument("--quiet", action="store_true", help="suppress per-run progress lines")

    summ = sub.add_parser("summarize", help="aggregate records into a CSV")
    summ.add_argument("records", help="JSON-lines record file from 'run'")
    summ.add_argument("--out", required=True, help="CSV file to write")
    summ.add_argument(
        "--scenario",
        default=None,
        help="pick one scenario when the record file mixes several",
    )
    summ.add_argument("--points", type=int, default=60, help="time grid size")
    summ.add_argument("--t-min", type=float, default=None, help="first grid time")
    summ.add_argument("--confidence", type=float, default=0.95, help="CI coverage")

    rend = sub.add_parser("render", help="draw a scenario as SVG")
    rend.add_argument("scenario", help="bundled scenario name or JSON path")
    rend.add_argument("--path", default=None, help="path JSON written by 'run --paths'")
    rend.add_argument("--out", required=True, help="SVG file to write")
    rend.add_argument("--width", type=int, default=640, help="image width in px")

    val = sub.add_parser("validate", help="check scenario files")
    val.add_argument("scenarios", nargs="+", help="scenario JSON paths or bundled names")
    return parser


def _run_overrides(args) -> dict:
    overrides = {}
    if args.budget is not None:
        overrides["budget_s"] = args.budget
    if args.w is not None:
        overrides["weight"] = args.w
    if args.resolution is not None:
        overrides["resolution"] = args.resolution
    if args.informed is not None:
        overrides["informed"] = args.informed
    if args.shortcut is not None:
        overrides["shortcut"] = args.shortcut == "on"
    if args.checks_per_second is not None:
        overrides["checks_per_second"] = args.checks_per_second
    if args.stop_cost is not None:
        overrides["stop_cost"] = args.stop_cost
    preset = args.mode_sampling
    if args.p is not None or args.latest_share is not None:
        if args.p is None or args.latest_share is None:
            raise ValueError("--p and --latest-share must be given together")
        MODE_SAMPLER_PRESETS["custom"] = ModeSamplerParams(args.p, args.latest_share)
        if preset is None:
            preset = "custom"
    if preset is not None:
        if preset not in MODE_SAMPLER_PRESETS:
            raise ValueError(
                f"unknown mode sampling preset {preset!r}; "
                "use --p/--latest-share to define 'custom'"
            )
        overrides["mode_sampler"] = preset
    return overrides


def _cmd_run(args) -> int:
    names = args.scenario or list_bundled_scenarios()
    scenarios = [_resolve_scenario(tok) for tok in names]
    kinds = args.planner or ["rrtstar", "birrtstar", "prmstar"]
    seeds = _parse_seeds(args.seeds)
    overrides = _run_overrides(args)
    log = None if args.quiet else lambda line: print(line, flush=True)
    records = run_benchmark(
        scenarios,
        kinds,
        seeds,
        overrides=overrides or None,
        out_path=args.out,
        paths_dir=args.paths,
        log=log,
    )
    solved = sum(1 for r in records if r.events)
    print(f"{solved}/{len(records)} runs solved", flush=True)
    return 0


def _cmd_summarize(args) -> int:
    records = load_records(args.records)
    if args.scenario is not None:
        records = [r for r in records if r.scenario == args.scenario]
        if not records:
            raise ValueError(f"no records for scenario {args.scenario!r}")
    summary = summarize(
        records, points=args.points, confidence=args.confidence, t_min=args.t_min
    )
    write_csv(summary, args.out)
    print(f"wrote {args.out} ({summary['scenario']}, {len(summary['planners'])} planners)")
    return 0


def _cmd_render(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    times = configs = None
    if args.path is not None:
        doc = json.loads(Path(args.path).read_text())
        times, configs = doc["times"], doc["configs"]
    render_path_svg(scenario, times=times, configs=configs, out=args.out, width=args.width)
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    failures = 0
    for token in args.scenarios:
        try:
            sc = _resolve_scenario(token)
        except ScenarioError as e:
            print(f"FAIL {token}: {e}")
            failures += 1
        else:
            print(
                f"ok   {token}: {len(sc.scene.robots)} robots, "
                f"{len(sc.ordering.tasks)} tasks"
            )
    return SCENARIO_ERROR if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "summarize":
            return _cmd_summarize(args)
        if args.command == "render":
            return _cmd_render(args)
        return _cmd_validate(args)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return SCENARIO_ERROR
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
