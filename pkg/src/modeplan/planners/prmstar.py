"""Batched roadmap planner over the composite mode space.

Each round samples transition configurations for every reached mode, then a
batch of free configurations per mode, wires the new vertices to their
k nearest neighbors inside their mode, and runs a lazy best-first search
from the start to any terminal-mode vertex: candidate edges are only
collision-checked when the search actually wants to settle through them,
and verdicts are cached across rounds.  The search is guided by
shortest-path bounds over the sampled transition configurations, recomputed
each round as that set grows, and once an incumbent exists it discards any
queue entry that cannot beat it.

Roadmap bookkeeping (neighbor wiring, bound recomputation, queue traffic)
is real work that collision counting alone would not see, so it is billed
to the planning clock at a fixed exchange rate of elementary operations per
collision check.  Without that, wall time per unit of budget would grow
with the roadmap while the budget stood still."""

from __future__ import annotations

import heapq
import math

import numpy as np

from .base import BasePlanner, PlannerStop, RunResult
from .heuristics import TransitionHeuristic, TransitionNode
from .rrtstar import _Bucket
from ..sampling import sample_informed, sample_transition, sample_uniform_config
from ..space import State
from ..tasks import Mode, is_terminal

# elementary bookkeeping operations (pairwise distance terms, queue ops)
# costed as one collision check; calibrated against this codebase's scene
# checks so a billed unit tracks comparable wall time
_OPS_PER_CHECK = 32


class PRMStarPlanner(BasePlanner):
    def __init__(self, space, ordering, start, config):
        super().__init__(space, ordering, start, config)
        self.qs: list[np.ndarray] = []
        self.node_mode: list[Mode] = []
        self.buckets: dict = {}
        self.links: dict = {}        # vertex -> twin vertices in successor modes
        self.transitions: list[TransitionNode] = []
        self.edge_ok: dict = {}      # (lo, hi) -> bool, persists across rounds
        self.adj: list[list[int]] = []       # edges picked by this vertex
        self.adj_w: list[np.ndarray] = []
        self.radj: list[list[int]] = []      # edges picked by a later vertex
        self.radj_w: list[list[float]] = []
        self._wired_upto = 0
        self._h_values = np.zeros(0)
        self._hr: TransitionHeuristic | None = None
        self._hr_n_transitions = -1
        self._terminal_sig: dict = {}
        self._best_raw = math.inf
        root = self._add_vertex(self.start.q, self.graph.canonical(self.start.mode))
        for opt in self.graph.options(self.start.mode):
            if opt.completed_task is None:
                child = self.graph.add(
                    self.start.mode,
                    self.space.scene.apply_post_conditions(
                        ordering, self.start.mode, opt, self.start.q
                    ),
                )
                twin = self._add_vertex(self.start.q, child)
                self.links.setdefault(root, []).append(twin)

    def _add_vertex(self, q: np.ndarray, mode: Mode) -> int:
        i = len(self.qs)
        q = np.array(q, dtype=float)
        self.qs.append(q)
        self.node_mode.append(mode)
        self.adj.append([])
        self.adj_w.append(np.zeros(0))
        self.radj.append([])
        self.radj_w.append([])
        bucket = self.buckets.get(mode.signature)
        if bucket is None:
            bucket = self.buckets[mode.signature] = _Bucket(self.space.dim)
            self._terminal_sig[mode.signature] = is_terminal(self.ordering, mode)
        bucket.add(i, q)
        return i

    def _bucket_has(self, mode: Mode, q: np.ndarray) -> bool:
        bucket = self.buckets.get(mode.signature)
        if bucket is None or bucket.n == 0:
            return False
        return float(np.min(self.space.mode_dist(bucket.Q, q))) < 1e-12

    def _bill(self, ops: int) -> None:
        if ops > 0:
            self.space.checks += max(1, ops // _OPS_PER_CHECK)

    # -- roadmap growth ---------------------------------------------------------

    def _sample_round_transitions(self) -> None:
        for mode in list(self.graph.reached):
            options = self.graph.options(mode)
            if not options:
                continue
            for _ in range(self.config.transition_batch):
                if self.out_of_budget():
                    return
                ts = sample_transition(
                    self.space,
                    mode,
                    self.ordering,
                    self.rng,
                    options=options,
                    budget=self.config.transition_budget,
                )
                if ts is None:
                    continue
                child = self.graph.add(mode, ts.child)
                if self._bucket_has(mode, ts.q) and self._bucket_has(child, ts.q):
                    continue  # e.g. an exact-pose task resamples one point
                exit_v = self._add_vertex(ts.q, mode)
                twin_v = self._add_vertex(ts.q, child)
                self.links.setdefault(exit_v, []).append(twin_v)
                self.transitions.append(TransitionNode(ts.q, mode, child, ts.option))

    def _sample_round_configs(self) -> None:
        """Fill every reached mode with a batch of free configurations.
        Once an incumbent exists, half of each batch is drawn from the
        informed set around it instead, landing in whatever incumbent mode
        the draw falls in; roadmaps refine nowhere else."""
        informed = self.incumbent is not None and self.config.informed != "off"
        for mode in list(self.graph.reached):
            for b in range(self.config.config_batch):
                if self.out_of_budget():
                    return
                if informed and b % 2 == 0:
                    draw = sample_informed(
                        self.space, self.incumbent, self.rng, self.config.informed
                    )
                    if draw is not None:
                        q, m = draw
                        m = self.graph.canonical(m)
                        if self.space.config_valid(q, m):
                            self._add_vertex(q, m)
                        continue
                q = sample_uniform_config(self.space, self.rng)
                if self.space.config_valid(q, mode):
                    self._add_vertex(q, mode)

    def _wire_new_vertices(self) -> None:
        """Connect every vertex added since the last round to its k nearest
        bucket mates (k grows with the bucket), recording the reverse edges
        so earlier vertices see the new ones too."""
        fresh = range(self._wired_upto, len(self.qs))
        self._wired_upto = len(self.qs)
        by_sig: dict = {}
        for v in fresh:
            by_sig.setdefault(self.node_mode[v].signature, []).append(v)
        cost_w = self.space.params.weight
        effort = self.config.heuristic == "effort"
        ops = 0
        for sig, new_ids in by_sig.items():
            bucket = self.buckets[sig]
            n = bucket.n
            if n < 2:
                continue
            k = min(n - 1, max(1, math.ceil(self.config.rewire_scale * math.log(n + 1.0))))
            Q = bucket.Q
            ids = bucket.ids
            pos = {v: p for p, v in enumerate(ids)}
            rows = np.array([pos[v] for v in new_ids])
            per = self.space.per_robot_dists(Q[rows][:, None, :], Q[None, :, :])
            ops += rows.size * n
            dmax = per.max(axis=-1)
            if effort:
                weights = np.ceil(dmax / self.space.resolution) + 1.0
            else:
                weights = (1.0 - cost_w) * dmax + cost_w * per.sum(axis=-1)
            dmax[np.arange(rows.size), rows] = math.inf
            if n - 1 <= k:
                near = np.argsort(dmax, axis=1, kind="stable")[:, : n - 1]
            else:
                part = np.argpartition(dmax, k - 1, axis=1)[:, :k]
                order = np.argsort(
                    np.take_along_axis(dmax, part, axis=1), axis=1, kind="stable"
                )
                near = np.take_along_axis(part, order, axis=1)
            for r, v in enumerate(new_ids):
                cols = near[r]
                self.adj[v] = [ids[int(c)] for c in cols]
                self.adj_w[v] = weights[r, cols]
                for c, w in zip(self.adj[v], self.adj_w[v]):
                    if c < v:  # newer same-batch mates already link back
                        self.radj[c].append(v)
                        self.radj_w[c].append(float(w))
        self._bill(ops)

    def _recompute_h(self) -> None:
        """Cost-to-go guesses for every vertex, batched per mode bucket.
        The roadmap search wants remaining cost, so the forward variant has
        no role here and falls back to the reverse one.  While the
        transition set stands still the stored values stay exact, so only
        vertices added since the last pass get computed."""
        n_total = len(self.qs)
        if self.config.heuristic == "none":
            self._h_values = np.zeros(n_total)
            return
        ops = 0
        fresh_from = len(self._h_values)
        if self._hr is None or len(self.transitions) != self._hr_n_transitions:
            variant = "effort" if self.config.heuristic == "effort" else "reverse"
            self._hr = TransitionHeuristic(
                self.space, self.ordering, self.transitions, variant
            )
            self._hr_n_transitions = len(self.transitions)
            ops += self._hr.build_ops + len(self.transitions)
            fresh_from = 0
        hr = self._hr
        if fresh_from == 0:
            self._h_values = np.zeros(n_total)
            for sig, bucket in self.buckets.items():
                ids = bucket.ids
                self._h_values[np.array(ids)] = hr.h_batch(
                    bucket.Q, self.node_mode[ids[0]]
                )
                ops += bucket.n * max(1, len(hr._exits.get(sig, ())))
        elif fresh_from < n_total:
            self._h_values = np.concatenate(
                [self._h_values, np.zeros(n_total - fresh_from)]
            )
            by_sig: dict = {}
            for v in range(fresh_from, n_total):
                by_sig.setdefault(self.node_mode[v].signature, []).append(v)
            for sig, ids in by_sig.items():
                self._h_values[np.array(ids)] = hr.h_batch(
                    np.stack([self.qs[v] for v in ids]), self.node_mode[ids[0]]
                )
                ops += len(ids) * max(1, len(hr._exits.get(sig, ())))
        self._bill(ops)

    # -- lazy search --------------------------------------------------------------

    def _edge_free(self, a: int, b: int, mode: Mode) -> bool:
        key = (a, b) if a < b else (b, a)
        hit = self.edge_ok.get(key)
        if hit is None:
            hit = self.space.edge_valid(self.qs[a], self.qs[b], mode)
            self.edge_ok[key] = hit
        return hit

    def _search(self) -> list[int] | None:
        """Best-first over the candidate roadmap with validate-on-pop edges.

        Ties on f prefer the entry with the larger g, which drives the
        search toward finishing a nearly complete path instead of fanning
        out at equal depth.  With an incumbent solution (and f in cost
        units) anything that cannot improve on it is dropped unexpanded."""
        h_values = self._h_values
        bound = math.inf
        if self.solutions and self.config.heuristic != "effort":
            # Gate on the best raw roadmap cost, not the shortcut incumbent:
            # a raw path above the incumbent can still shortcut below it.
            bound = self._best_raw * (1.0 - self.config.improvement_threshold)
        came: dict = {0: -1}
        settled: set = set()
        tick = 0
        ops = 0
        if math.isinf(h_values[0]) or h_values[0] >= bound:
            return None
        heap = [(float(h_values[0]), 0.0, tick, 0, -1)]
        try:
            while heap:
                f, neg_g, _, v, u = heapq.heappop(heap)
                ops += 1
                if v in settled or f >= bound:
                    continue
                if u >= 0 and not self._edge_free(u, v, self.node_mode[u]):
                    continue
                settled.add(v)
                came[v] = u
                if self._terminal_sig[self.node_mode[v].signature]:
                    chain = []
                    while v >= 0:
                        chain.append(v)
                        v = came[v]
                    chain.reverse()
                    return chain
                g_v = -neg_g
                weights = self.adj_w[v]
                for pos, nb in enumerate(self.adj[v]):
                    if nb in settled:
                        continue
                    h_n = h_values[nb]
                    g_n = g_v + float(weights[pos])
                    if g_n + h_n >= bound:
                        continue
                    tick += 1
                    heapq.heappush(heap, (g_n + h_n, -g_n, tick, nb, v))
                for pos, nb in enumerate(self.radj[v]):
                    if nb in settled:
                        continue
                    h_n = h_values[nb]
                    g_n = g_v + self.radj_w[v][pos]
                    if g_n + h_n >= bound:
                        continue
                    tick += 1
                    heapq.heappush(heap, (g_n + h_n, -g_n, tick, nb, v))
                for twin in self.links.get(v, ()):  # pre-validated, zero length
                    if twin in settled:
                        continue
                    h_n = h_values[twin]
                    if g_v + h_n >= bound:
                        continue
                    tick += 1
                    heapq.heappush(heap, (g_v + h_n, -g_v, tick, twin, v))
            return None
        finally:
            self._bill(ops + 2 * tick)

    # -- main loop ------------------------------------------------------------------

    def _round(self) -> None:
        self._sample_round_transitions()
        if self.out_of_budget():
            return
        self._sample_round_configs()
        self._wire_new_vertices()
        self._recompute_h()
        chain = self._search()
        if chain is None:
            return
        configs = np.stack([self.qs[v] for v in chain])
        raw = self.space.path_cost(configs)
        if self.solutions and raw >= self._best_raw * (
            1.0 - self.config.improvement_threshold
        ):
            return
        self._best_raw = min(self._best_raw, raw)
        self.try_emit([State(self.qs[v].copy(), self.node_mode[v]) for v in chain])

    def solve(self) -> RunResult:
        try:
            while not self.out_of_budget():
                self._round()
        except PlannerStop:
            pass
        return self.result()
