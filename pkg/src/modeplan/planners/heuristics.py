"""Cost-to-go bounds over the discovered transition structure.

Every route to the terminal task must pass through some chain of task
completions.  Treating each known transition configuration as a graph node
and pricing the hop between two configurations of one mode at its
obstacle-free segment cost gives, per transition, a shortest-path value that
understates any feasible continuation through those configurations.  States
then inherit a bound by adding the straight-line cost to each exit of their
mode.  The bound is relative to the transition configurations supplied:
searches that only ever move through these configurations (as the roadmap
planner does) can rely on it outright."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..space import CompositeSpace, State
from ..tasks import Mode, OrderingGraph, TransitionOption, is_terminal


@dataclass(eq=False)
class TransitionNode:
    """A configuration at which ``option`` completes, leaving ``parent``
    mode for ``child``."""

    q: np.ndarray
    parent: Mode
    child: Mode
    option: TransitionOption


class TransitionHeuristic:
    """Shortest-path values over transition nodes, queryable per state.

    variant "reverse" prices remaining cost; "effort" prices remaining
    collision checks (each hop costs its discretized check count);
    "forward" prices the cheapest way to reach a transition from the start
    state and is queried with :meth:`reach_bound`."""

    def __init__(
        self,
        space: CompositeSpace,
        ordering: OrderingGraph,
        transitions: list[TransitionNode],
        variant: str = "reverse",
        start: State | None = None,
    ):
        if variant not in ("reverse", "forward", "effort"):
            raise ValueError(f"unknown heuristic variant {variant!r}")
        if variant == "forward" and start is None:
            raise ValueError("forward variant needs the start state")
        self.space = space
        self.ordering = ordering
        self.variant = variant
        self.transitions = list(transitions)
        self.start = start
        self._exits: dict = {}    # mode signature -> [transition index]
        self._entries: dict = {}  # mode signature -> [transition index]
        self._exit_pos: dict = {}   # transition index -> column in its exit block
        self._entry_pos: dict = {}  # transition index -> row in its entry block
        for i, t in enumerate(self.transitions):
            exits = self._exits.setdefault(t.parent.signature, [])
            self._exit_pos[i] = len(exits)
            exits.append(i)
            entries = self._entries.setdefault(t.child.signature, [])
            self._entry_pos[i] = len(entries)
            entries.append(i)
        # pairwise hop weights inside each mode, entry rows by exit columns
        self._blocks: dict = {}
        self.build_ops = 0
        for sig, cols in self._exits.items():
            rows = self._entries.get(sig)
            if not rows:
                continue
            qr = np.stack([self.transitions[i].q for i in rows])
            qc = np.stack([self.transitions[j].q for j in cols])
            self._blocks[sig] = self._w_batch(qr, qc)
            self.build_ops += len(rows) * len(cols)
        self.dist = self._solve()

    # hop weight between two configurations of one mode

    def _w_batch(self, qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
        """Hop weights between every row of ``qa`` and every row of ``qb``.

        The effort weight prices an arc at ceil(d/resolution) + 1 checks, so
        a zero-length arc costs exactly one check."""
        a = np.asarray(qa, dtype=float)[:, None, :]
        b = np.asarray(qb, dtype=float)[None, :, :]
        if self.variant == "effort":
            d = self.space.mode_dist(a, b)
            return np.ceil(d / self.space.resolution) + 1.0
        return self.space.segment_cost(a, b)

    def _w(self, q1: np.ndarray, q2: np.ndarray) -> float:
        if self.variant == "effort":
            d = float(self.space.mode_dist(q1, q2))
            return math.ceil(d / self.space.resolution) + 1.0
        return float(self.space.segment_cost(q1, q2))

    def _solve(self) -> np.ndarray:
        n = len(self.transitions)
        dist = np.full(n, math.inf)
        heap: list = []
        tick = 0
        if self.variant == "forward":
            # cheapest way from the start state to complete each transition
            sig = self.start.mode.signature
            seeds = self._exits.get(sig, [])
            if seeds:
                qc = np.stack([self.transitions[j].q for j in seeds])
                w0 = self._w_batch(self.start.q[None, :], qc)[0]
                for pos, j in enumerate(seeds):
                    if w0[pos] < dist[j]:
                        dist[j] = float(w0[pos])
                        heapq.heappush(heap, (dist[j], tick, j))
                        tick += 1
            while heap:
                d, _, j = heapq.heappop(heap)
                if d > dist[j]:
                    continue
                child_sig = self.transitions[j].child.signature
                cols = self._exits.get(child_sig, [])
                if not cols:
                    continue
                row = self._blocks[child_sig][self._entry_pos[j]]
                for pos, k in enumerate(cols):
                    nd = d + float(row[pos])
                    if nd < dist[k]:
                        dist[k] = nd
                        heapq.heappush(heap, (nd, tick, k))
                        tick += 1
            return dist
        # reverse/effort: value after completing a transition
        for j, t in enumerate(self.transitions):
            if is_terminal(self.ordering, t.child):
                dist[j] = 0.0
                heapq.heappush(heap, (0.0, tick, j))
                tick += 1
        while heap:
            d, _, j = heapq.heappop(heap)
            if d > dist[j]:
                continue
            parent_sig = self.transitions[j].parent.signature
            rows = self._entries.get(parent_sig, [])
            if not rows:
                continue
            # any transition arriving in this mode can continue through j
            col = self._blocks[parent_sig][:, self._exit_pos[j]]
            for pos, i in enumerate(rows):
                nd = d + float(col[pos])
                if nd < dist[i]:
                    dist[i] = nd
                    heapq.heappush(heap, (nd, tick, i))
                    tick += 1
        return dist

    def h(self, q: np.ndarray, mode: Mode) -> float:
        """Remaining cost (or effort) from a state, through known exits."""
        return float(self.h_batch(np.asarray(q, dtype=float)[None, :], mode)[0])

    def h_batch(self, configs: np.ndarray, mode: Mode) -> np.ndarray:
        """`h` for a whole stack of same-mode configurations at once."""
        configs = np.asarray(configs, dtype=float)
        n = configs.shape[0]
        if is_terminal(self.ordering, mode):
            return np.zeros(n)
        idx = [
            j
            for j in self._exits.get(mode.signature, [])
            if not math.isinf(self.dist[j])
        ]
        if not idx:
            return np.full(n, math.inf)
        qc = np.stack([self.transitions[j].q for j in idx])
        w = self._w_batch(configs, qc)
        return np.min(w + self.dist[np.array(idx)][None, :], axis=1)

    def reach_bound(self, q: np.ndarray, mode: Mode) -> float:
        """Forward variant: cheapest conceivable cost from the start to a
        state of the given mode."""
        if self.variant != "forward":
            raise ValueError("reach_bound is only defined for the forward variant")
        if mode == self.start.mode:
            return self._w(self.start.q, q)
        best = math.inf
        for i in self._entries.get(mode.signature, []):
            if math.isinf(self.dist[i]):
                continue
            d = float(self.dist[i]) + self._w(self.transitions[i].q, q)
            if d < best:
                best = d
        return best
