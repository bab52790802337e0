"""Anytime rewiring tree planners over the composite mode space.

One tree spans every reached mode.  Within a mode the planner behaves like
a k-nearest rewiring tree; task completions create zero-cost twin vertices
in the successor mode, so a root-to-leaf chain through twins is a full
multi-modal plan.  The bidirectional variant additionally grows throwaway
backward trees from sampled exit configurations of each mode and merges a
backward branch into the forward tree whenever the two meet."""

from __future__ import annotations

import math

import numpy as np

from .base import BasePlanner, PlannerStop, RunResult
from ..sampling import (
    sample_informed,
    sample_mode,
    sample_transition,
    sample_uniform_config,
)
from ..scene import TransitionError
from ..space import State
from ..tasks import Mode, is_terminal


class _Bucket:
    """Per-mode vertex store with a growing configuration matrix."""

    def __init__(self, dim: int):
        self.ids: list[int] = []
        self._q = np.empty((16, dim))
        self.n = 0

    def add(self, node_id: int, q: np.ndarray) -> None:
        if self.n == self._q.shape[0]:
            self._q = np.vstack([self._q, np.empty_like(self._q)])
        self._q[self.n] = q
        self.n += 1
        self.ids.append(node_id)

    @property
    def Q(self) -> np.ndarray:
        return self._q[: self.n]


class RRTStarPlanner(BasePlanner):
    def __init__(self, space, ordering, start, config):
        super().__init__(space, ordering, start, config)
        self.qs: list[np.ndarray] = []
        self.node_mode: list[Mode] = []
        self.parent: list[int] = []
        self.g: list[float] = []
        self.kids: list[list[int]] = []
        self.buckets: dict = {}
        self.goal_nodes: list[int] = []
        self._goal_set: set[int] = set()
        self._goal_dirty = False
        self._terminal_sig: dict = {}
        root = self._new_node(self.start.q, self.graph.canonical(self.start.mode), -1, 0.0)
        # activation happens in place and costs nothing, so it is resolved
        # once, at the root
        for opt in self.graph.options(self.start.mode):
            if opt.completed_task is None:
                child = self.graph.add(
                    self.start.mode,
                    self.space.scene.apply_post_conditions(
                        ordering, self.start.mode, opt, self.start.q
                    ),
                )
                self._new_node(self.start.q, child, root, 0.0)

    # -- tree bookkeeping ---------------------------------------------------

    def _new_node(self, q: np.ndarray, mode: Mode, parent: int, g: float) -> int:
        i = len(self.qs)
        q = np.array(q, dtype=float)
        # every edge stays inside one mode or crosses at one configuration,
        # so no finite-cost edge can hide an infinite state distance
        assert parent < 0 or self.node_mode[parent] == mode or np.array_equal(
            q, self.qs[parent]
        )
        self.qs.append(q)
        self.node_mode.append(mode)
        self.parent.append(parent)
        self.g.append(g)
        self.kids.append([])
        if parent >= 0:
            self.kids[parent].append(i)
        bucket = self.buckets.get(mode.signature)
        if bucket is None:
            bucket = self.buckets[mode.signature] = _Bucket(self.space.dim)
            self._terminal_sig[mode.signature] = is_terminal(self.ordering, mode)
        bucket.add(i, q)
        if self._terminal_sig[mode.signature]:
            self.goal_nodes.append(i)
            self._goal_set.add(i)
            self._goal_dirty = True
        return i

    def _reparent(self, j: int, new_parent: int, new_g: float) -> None:
        old = self.parent[j]
        if old >= 0:
            self.kids[old].remove(j)
        self.parent[j] = new_parent
        self.kids[new_parent].append(j)
        delta = self.g[j] - new_g
        stack = [j]
        while stack:
            u = stack.pop()
            self.g[u] -= delta
            if u in self._goal_set:
                self._goal_dirty = True
            stack.extend(self.kids[u])

    def _near_ids(self, bucket: _Bucket, q: np.ndarray, k: int):
        d = self.space.mode_dist(bucket.Q, q)
        if bucket.n <= k:
            order = np.argsort(d, kind="stable")
        else:
            part = np.argpartition(d, k - 1)[:k]
            order = part[np.argsort(d[part], kind="stable")]
        return [bucket.ids[int(i)] for i in order]

    def _rewire_from(self, src: int) -> None:
        """Standard neighborhood rewiring around an existing vertex: adopt any
        near vertex whose cost-to-come drops by routing through ``src``."""
        mode = self.node_mode[src]
        bucket = self.buckets[mode.signature]
        n = bucket.n
        if n < 2:
            return
        k = min(n, max(1, math.ceil(self.config.rewire_scale * math.log(n + 1.0))))
        q = self.qs[src]
        g_src = self.g[src]
        near = [j for j in self._near_ids(bucket, q, k) if j != src and j != self.parent[src]]
        if not near:
            return
        segs = self.space.segment_cost(np.stack([self.qs[j] for j in near]), q[None, :])
        for c, j in zip(segs, near):
            c = float(c)
            if g_src + c < self.g[j] - 1e-12 and self.space.edge_valid(
                q, self.qs[j], mode
            ):
                self._reparent(j, src, g_src + c)

    # -- growth ---------------------------------------------------------------

    def _extend(self, mode: Mode, q_target: np.ndarray) -> int | None:
        bucket = self.buckets.get(mode.signature)
        if bucket is None or bucket.n == 0:
            return None
        d_all = self.space.mode_dist(bucket.Q, q_target)
        ni = int(np.argmin(d_all))
        d = float(d_all[ni])
        if d < 1e-12:
            return bucket.ids[ni]
        eta = self.config.steer_range
        q_new = (
            np.array(q_target, dtype=float)
            if d <= eta
            else self.space.lerp(bucket.Q[ni], q_target, eta / d)
        )
        n = bucket.n
        k = min(n, max(1, math.ceil(self.config.rewire_scale * math.log(n + 1.0))))
        near = self._near_ids(bucket, q_new, k)
        segs = self.space.segment_cost(np.stack([self.qs[j] for j in near]), q_new[None, :])
        arrival = np.array([self.g[j] for j in near]) + segs
        parent = -1
        for oi in np.argsort(arrival, kind="stable"):
            j = near[int(oi)]
            if self.space.edge_valid(self.qs[j], q_new, mode):
                parent = j
                g_new = float(arrival[oi])
                break
        if parent < 0:
            return None
        new_id = self._new_node(q_new, mode, parent, g_new)
        for c, j in zip(segs, near):
            if j == parent:
                continue
            c = float(c)
            if g_new + c < self.g[j] - 1e-12 and self.space.edge_valid(
                q_new, self.qs[j], mode
            ):
                self._reparent(j, new_id, g_new + c)
        return new_id

    def _spawn_transitions(self, node_id: int) -> None:
        """Create zero-cost twins in successor modes for every option whose
        constraint holds exactly at this vertex."""
        mode = self.node_mode[node_id]
        q = self.qs[node_id]
        scene = self.space.scene
        for opt in self.graph.options(mode):
            if opt.completed_task is None:
                continue
            task = self.ordering.task(opt.completed_task)
            if not scene.constraint_satisfied(task, mode, q, self.ordering):
                continue
            try:
                child = scene.apply_post_conditions(self.ordering, mode, opt, q)
            except TransitionError:
                continue
            if not self.space.config_valid(q, child):
                continue
            child = self.graph.add(mode, child)
            bucket = self.buckets.get(child.signature)
            if bucket is not None and bucket.n:
                d = self.space.mode_dist(bucket.Q, q)
                ti = int(np.argmin(d))
                if float(d[ti]) < 1e-12:
                    twin = bucket.ids[ti]
                    if self.g[node_id] < self.g[twin] - 1e-12:
                        self._reparent(twin, node_id, self.g[node_id])
                        self._rewire_from(twin)
                    continue
            twin = self._new_node(q, child, node_id, self.g[node_id])
            self._rewire_from(twin)

    def _trace(self, node_id: int) -> list[State]:
        chain = []
        j = node_id
        while j >= 0:
            chain.append(State(self.qs[j].copy(), self.node_mode[j]))
            j = self.parent[j]
        chain.reverse()
        return chain

    def _maybe_emit_goal(self) -> None:
        """Emit the cheapest goal leaf when one may have improved.  The dirty
        flag is raised by goal-node creation and by any reparenting whose
        subtree touches a goal node; everything else leaves the goal costs
        exactly as they were, so the scan can be skipped."""
        if not self.goal_nodes or not self._goal_dirty:
            return
        self._goal_dirty = False
        j = min(self.goal_nodes, key=lambda i: (self.g[i], i))
        if self.solutions and self.g[j] >= self.best_cost * (
            1.0 - self.config.improvement_threshold
        ):
            return
        self.try_emit(self._trace(j))

    # -- main loop -------------------------------------------------------------

    def _pick_target(self, mode: Mode):
        """Returns (mode, q_target) for this iteration, or None to skip."""
        rng = self.rng
        if rng.random() < self.config.goal_bias:
            ts = sample_transition(
                self.space,
                mode,
                self.ordering,
                rng,
                options=self.graph.options(mode),
                budget=self.config.transition_budget,
            )
            if ts is None:
                return None
            return mode, ts.q
        if self.incumbent is not None and self.config.informed != "off":
            draw = sample_informed(self.space, self.incumbent, rng, self.config.informed)
            if draw is not None:
                q, m = draw
                if m in self.graph:
                    return self.graph.canonical(m), q
        return mode, sample_uniform_config(self.space, rng)

    def _iteration(self) -> None:
        mode = self.graph.canonical(sample_mode(self.graph, self.mode_params(), self.rng))
        picked = self._pick_target(mode)
        if picked is None:
            return
        mode, q_target = picked
        new_id = self._extend(mode, q_target)
        if new_id is None:
            return
        self._spawn_transitions(new_id)
        self._maybe_emit_goal()

    def solve(self) -> RunResult:
        try:
            while not self.out_of_budget():
                self._iteration()
        except PlannerStop:
            pass
        return self.result()


class BiRRTStarPlanner(RRTStarPlanner):
    """Forward rewiring tree plus per-mode backward trees.

    Exit configurations of each mode are sampled into a bounded pool and
    used as backward roots.  Backward trees grow without rewiring; when a
    forward extension lands close enough to a backward vertex and the
    connecting edge is free, the backward branch is replayed into the
    forward tree, ending at the exit where the usual twin machinery takes
    over.  After a merge the mode's backward tree is rebuilt from its
    roots, which keeps the trees small and prevents duplicate replays."""

    def __init__(self, space, ordering, start, config):
        super().__init__(space, ordering, start, config)
        self.exits: dict = {}  # mode signature -> list of TransitionSample
        self.bwd: dict = {}    # mode signature -> backward tree store

    def _bwd_tree(self, sig):
        tree = self.bwd.get(sig)
        if tree is None:
            tree = self.bwd[sig] = {
                "bucket": _Bucket(self.space.dim),
                "parent": [],
                "root_exit": [],
            }
        return tree

    def _add_bwd(self, sig, q, parent: int, root_exit: int) -> int:
        tree = self._bwd_tree(sig)
        i = tree["bucket"].n
        tree["bucket"].add(i, q)
        tree["parent"].append(parent)
        tree["root_exit"].append(root_exit)
        return i

    def _reset_bwd(self, sig) -> None:
        """Rebuild a mode's backward tree from just the pooled exits."""
        self.bwd.pop(sig, None)
        for idx, ts in enumerate(self.exits.get(sig, [])):
            self._add_bwd(sig, ts.q, -1, idx)

    def _pool_exit(self, mode: Mode) -> None:
        """Add an exit to the mode's pool, or once full, occasionally swap a
        random slot for a fresh draw.  A frozen pool would pin junction
        placement to whatever the first few draws happened to give, putting
        a floor under the final cost no amount of budget could break."""
        sig = mode.signature
        pool = self.exits.setdefault(sig, [])
        full = len(pool) >= self.config.exit_pool_size
        if full and self.rng.random() >= 0.25:
            return
        ts = sample_transition(
            self.space,
            mode,
            self.ordering,
            self.rng,
            options=self.graph.options(mode),
            budget=self.config.transition_budget,
        )
        if ts is None:
            return
        if full:
            pool[int(self.rng.integers(len(pool)))] = ts
            self._reset_bwd(sig)
        else:
            pool.append(ts)
            self._add_bwd(sig, ts.q, -1, len(pool) - 1)

    def _grow_backward(self, mode: Mode, q_target: np.ndarray) -> None:
        sig = mode.signature
        tree = self.bwd.get(sig)
        if tree is None or tree["bucket"].n == 0:
            return
        bucket = tree["bucket"]
        d_all = self.space.mode_dist(bucket.Q, q_target)
        ni = int(np.argmin(d_all))
        d = float(d_all[ni])
        if d < 1e-12:
            return
        eta = self.config.steer_range
        q_new = (
            np.array(q_target, dtype=float)
            if d <= eta
            else self.space.lerp(bucket.Q[ni], q_target, eta / d)
        )
        if self.space.edge_valid(bucket.Q[ni], q_new, mode):
            self._add_bwd(sig, q_new, ni, tree["root_exit"][ni])

    def _try_connect(self, mode: Mode, fwd_id: int) -> None:
        sig = mode.signature
        tree = self.bwd.get(sig)
        if tree is None or tree["bucket"].n == 0:
            return
        bucket = tree["bucket"]
        q = self.qs[fwd_id]
        d_all = self.space.mode_dist(bucket.Q, q)
        bi = int(np.argmin(d_all))
        if float(d_all[bi]) > self.config.steer_range:
            return
        if float(d_all[bi]) > 1e-12 and not self.space.edge_valid(q, bucket.Q[bi], mode):
            return
        # replay the backward branch forward: bi -> ... -> root exit
        chain = []
        j = bi
        while j >= 0:
            chain.append(j)
            j = tree["parent"][j]
        cur = fwd_id
        for j in chain:
            qj = bucket.Q[j].copy()
            if float(self.space.mode_dist(self.qs[cur], qj)) < 1e-12:
                continue
            g = self.g[cur] + float(self.space.segment_cost(self.qs[cur], qj))
            cur = self._new_node(qj, mode, cur, g)
        self._spawn_transitions(cur)
        self._reset_bwd(sig)

    def _iteration(self) -> None:
        rng = self.rng
        mode = self.graph.canonical(sample_mode(self.graph, self.mode_params(), rng))
        if rng.random() < self.config.goal_bias:
            self._pool_exit(mode)
            pool = self.exits.get(mode.signature, [])
            if not pool:
                return
            q_target = pool[int(rng.integers(len(pool)))].q
        else:
            picked = None
            if self.incumbent is not None and self.config.informed != "off":
                picked = sample_informed(self.space, self.incumbent, rng, self.config.informed)
            if picked is not None:
                q_target, m = picked
                if m in self.graph:
                    mode = self.graph.canonical(m)
            else:
                q_target = sample_uniform_config(self.space, rng)
            self._grow_backward(mode, q_target)
        new_id = self._extend(mode, q_target)
        if new_id is None:
            return
        self._spawn_transitions(new_id)
        self._try_connect(mode, new_id)
        self._maybe_emit_goal()
