"""Aggregate benchmark records into cost-over-time curves.

Each run's event list is a step function: the cost of the best path found
so far, defined from the first solution onward.  The summary samples every
run's step function on a shared log-spaced time grid and reports, per
planner and grid time, the median cost across the runs that have solved by
then, with a distribution-free confidence interval.

The interval comes from order statistics: for n solved runs, the pair
(x_(r), x_(n+1-r)) covers the true median with probability
1 - 2 * P(B <= r - 1) where B ~ Binomial(n, 1/2), so the widest r that
keeps coverage at or above the requested level needs nothing but binomial
coefficients.  Fewer than six runs cannot reach 95% coverage, in which
case the interval degrades to the full observed range.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .runner import RunRecord


def median_ci(
    values: Sequence[float], confidence: float = 0.95
) -> tuple[float, float, float]:
    """Median and an order-statistic confidence interval for it.

    Returns (median, lo, hi).  The interval is exact and distribution
    free; when the sample is too small for the requested coverage it
    falls back to (min, max).
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    xs = sorted(float(v) for v in values)
    n = len(xs)
    if n == 0:
        raise ValueError("median_ci needs at least one value")
    mid = n // 2
    med = xs[mid] if n % 2 else 0.5 * (xs[mid - 1] + xs[mid])
    alpha = 1.0 - confidence
    # Largest r (1-indexed) with 2 * P(B <= r - 1) <= alpha, B ~ Bin(n, 1/2).
    scale = 0.5**n
    tail = 0.0
    r = 0
    for k in range(n // 2 + 1):
        tail += math.comb(n, k) * scale
        if 2.0 * tail <= alpha:
            r = k + 1
        else:
            break
    if r == 0:
        return med, xs[0], xs[-1]
    return med, xs[r - 1], xs[n - r]


def time_grid(budget_s: float, points: int = 60, t_min: float | None = None):
    """Log-spaced sample times from ``t_min`` up to the budget."""
    if t_min is None:
        t_min = budget_s / 1000.0
    if not 0.0 < t_min < budget_s:
        raise ValueError("t_min must be positive and below the budget")
    return np.geomspace(t_min, budget_s, points)


def cost_at(record: RunRecord, t: float) -> float | None:
    """Best cost the run had found by virtual time ``t`` (None if unsolved)."""
    times = [e[0] for e in record.events]
    i = bisect_right(times, t)
    return record.events[i - 1][1] if i else None


def summarize(
    records: Iterable[RunRecord],
    points: int = 60,
    confidence: float = 0.95,
    t_min: float | None = None,
) -> dict:
    """Per-planner median cost curves over a shared log time grid.

    All records must belong to one scenario; comparing curves across
    scenarios on one time axis would be meaningless.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    scenarios = {r.scenario for r in records}
    if len(scenarios) != 1:
        raise ValueError(
            "records span multiple scenarios (%s); summarize one at a time"
            % ", ".join(sorted(scenarios))
        )
    budget = max(r.budget_s for r in records)
    grid = time_grid(budget, points, t_min)
    by_planner: dict[str, list[RunRecord]] = {}
    for r in records:
        by_planner.setdefault(r.planner, []).append(r)
    curves = {}
    for planner in sorted(by_planner):
        runs = by_planner[planner]
        medians: list[float | None] = []
        lo: list[float | None] = []
        hi: list[float | None] = []
        n_solved: list[int] = []
        for t in grid:
            costs = [c for c in (cost_at(r, float(t)) for r in runs) if c is not None]
            n_solved.append(len(costs))
            if costs:
                m, a, b = median_ci(costs, confidence)
                medians.append(m)
                lo.append(a)
                hi.append(b)
            else:
                medians.append(None)
                lo.append(None)
                hi.append(None)
        curves[planner] = {
            "median": medians,
            "ci_lo": lo,
            "ci_hi": hi,
            "n_solved": n_solved,
            "n_runs": len(runs),
        }
    return {
        "scenario": scenarios.pop(),
        "times": [float(t) for t in grid],
        "confidence": confidence,
        "planners": curves,
    }


def write_csv(summary: dict, path: str | Path) -> None:
    """Flatten a summary to CSV, one row per (planner, grid time)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["planner", "t", "median", "ci_lo", "ci_hi", "n_solved"])
        times = summary["times"]
        for planner, curve in summary["planners"].items():
            for i, t in enumerate(times):
                med = curve["median"][i]
                w.writerow(
                    [
                        planner,
                        f"{t:.6g}",
                        "" if med is None else f"{med:.6g}",
                        "" if med is None else f"{curve['ci_lo'][i]:.6g}",
                        "" if med is None else f"{curve['ci_hi'][i]:.6g}",
                        curve["n_solved"][i],
                    ]
                )
