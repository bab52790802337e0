"""Prioritized sequential baseline.

Picks one symbolic completion sequence and one robot priority order, then
realizes the sequence step by step: for each task completion it samples a
goal configuration for the executing robots (everyone else parks where they
stand) and plans each executor in priority order through a time-extended
tree that treats previously planned executors as moving obstacles and can
wait in place.  Whoever arrives early waits at its goal, so completions
happen in sequence order.  Parked robots never move aside, which is exactly
the weakness composite planners are measured against."""

from __future__ import annotations

import math

import numpy as np

from .base import BasePlanner, PlannerStop, RunResult
from ..scene import TransitionError
from ..space import State, _bisection_order
from ..tasks import enumerate_valid_sequences, is_terminal


def _traj_sample(traj: list[tuple[float, np.ndarray]], t: float) -> np.ndarray:
    if t <= traj[0][0]:
        return traj[0][1]
    if t >= traj[-1][0]:
        return traj[-1][1]
    for k in range(len(traj) - 1):
        t0, q0 = traj[k]
        t1, q1 = traj[k + 1]
        if t0 <= t <= t1:
            if t1 - t0 <= 1e-12:
                return q1
            s = (t - t0) / (t1 - t0)
            return q0 + s * (q1 - q0)
    return traj[-1][1]


class PrioritizedPlanner(BasePlanner):
    def solve(self) -> RunResult:
        sequences = enumerate_valid_sequences(
            self.ordering, self.rng, max_count=64, start_mode=self.start.mode
        )
        if not sequences:
            return self.result()
        retries = 0
        try:
            while not self.out_of_budget() and retries < self.config.max_sequence_retries:
                retries += 1
                seq = sequences[int(self.rng.integers(len(sequences)))]
                priority = [
                    int(v) for v in self.rng.permutation(len(self.space.scene.robots))
                ]
                states = self._plan_sequence(seq, priority)
                if states is not None:
                    self.try_emit(states)
        except PlannerStop:
            pass
        return self.result()

    # -- one full sequence ---------------------------------------------------

    def _plan_sequence(self, seq, priority) -> list[State] | None:
        scene = self.space.scene
        mode = self.start.mode
        q = np.array(self.start.q, dtype=float)
        states = [State(q.copy(), mode)]
        for opt in seq:
            if self.out_of_budget():
                return None
            if opt.completed_task is None:
                mode = scene.apply_post_conditions(self.ordering, mode, opt, q)
                states.append(State(q.copy(), mode))
                continue
            task = self.ordering.task(opt.completed_task)
            executors = scene.task_executors(task, mode, self.ordering)
            step = None
            for _ in range(self.config.step_retries):
                if self.out_of_budget():
                    return None
                goal_q = self._sample_step_goal(task, mode, q, opt)
                if goal_q is None:
                    continue
                step = self._plan_step(mode, q, goal_q, executors, priority)
                if step is not None:
                    break
            if step is None:
                return None
            step_states, q = step
            states.extend(step_states)
            try:
                mode = scene.apply_post_conditions(self.ordering, mode, opt, q)
            except TransitionError:
                return None
            states.append(State(q.copy(), mode))
        if not is_terminal(self.ordering, mode):
            return None
        return states

    def _sample_step_goal(self, task, mode, q, opt) -> np.ndarray | None:
        scene = self.space.scene
        for _ in range(self.config.goal_sample_tries):
            qa = scene.constraint_sample(task, mode, q, self.ordering, self.rng)
            if qa is None or not scene.within_limits(qa):
                self.space.checks += 1
                continue
            if not self.space.config_valid(qa, mode):
                continue
            try:
                child = scene.apply_post_conditions(self.ordering, mode, opt, qa)
            except TransitionError:
                continue
            if not self.space.config_valid(qa, child):
                continue
            return qa
        return None

    # -- one completion step ---------------------------------------------------

    def _plan_step(self, mode, q_start, q_goal, executors, priority):
        scene = self.space.scene
        order = sorted(executors, key=lambda rid: priority[scene.robot_id_index(rid)])
        moving: list[tuple[slice, list[tuple[float, np.ndarray]]]] = []
        for rid in order:
            sl = scene.robot_slice(rid)
            traj = self._robot_tree(mode, q_start, sl, q_goal[sl], moving)
            if traj is None:
                return None
            moving.append((sl, traj))
        times = sorted({bp[0] for _, traj in moving for bp in traj})
        out: list[State] = []
        prev = q_start
        for t in times:
            if t <= 0.0:
                continue
            qc = q_start.copy()
            for sl, traj in moving:
                qc[sl] = _traj_sample(traj, t)
            if float(self.space.mode_dist(prev, qc)) > 1e-12:
                out.append(State(qc.copy(), mode))
                prev = qc
        final = q_goal.copy()
        if out and float(self.space.mode_dist(out[-1].q, final)) <= 1e-12:
            out[-1] = State(final, mode)
        else:
            out.append(State(final, mode))
        return out, q_goal.copy()

    # -- single robot, time-extended -----------------------------------------------

    def _segment_free(self, mode, q_base, sl, qa, ta, qb, tb, moving) -> bool:
        span = max(float(np.linalg.norm(qb - qa)), tb - ta)
        n = max(2, int(math.ceil(span / self.space.resolution)) + 1)
        ts = np.linspace(ta, tb, n)
        Q = np.tile(q_base, (n, 1))
        for slm, traj in moving:
            Q[:, slm] = np.stack([_traj_sample(traj, t) for t in ts])
        Q[:, sl] = np.linspace(qa, qb, n)
        order, _ = _bisection_order(n)
        free = self.space.scene.collision_free_batch(Q[order], mode)
        if free.all():
            self.space.checks += n
            return True
        self.space.checks += int(np.argmin(free)) + 1
        return False

    def _robot_tree(self, mode, q_base, sl, q_goal, moving):
        """Grow a tree in (configuration, time) for one robot; waiting in
        place is just a zero-displacement extension.  Returns breakpoints
        (t, q) from t=0 to arrival, or None."""
        rng = self.rng
        q0 = q_base[sl].copy()
        d0 = float(np.linalg.norm(q_goal - q0))
        if d0 < 1e-12:
            return [(0.0, q0)]
        lo = self.space.limits[0, sl]
        hi = self.space.limits[1, sl]
        horizon = max(4.0, 3.0 * d0 + 2.0)
        nodes_q = [q0]
        nodes_t = [0.0]
        parents = [-1]
        goal_id = None
        for _ in range(self.config.robot_rrt_iters):
            if self.out_of_budget():
                return None
            if rng.random() < 0.25:
                q_s = q_goal.copy()
            else:
                q_s = rng.uniform(lo, hi)
            t_s = float(rng.uniform(0.0, horizon))
            Q = np.stack(nodes_q)
            T = np.array(nodes_t)
            ok = T < t_s - 1e-9
            if not ok.any():
                continue
            dq = np.linalg.norm(Q - q_s, axis=1)
            score = np.where(ok, dq + np.abs(T - t_s), math.inf)
            j = int(np.argmin(score))
            dt = min(t_s - nodes_t[j], 1.0)
            delta = q_s - nodes_q[j]
            length = float(np.linalg.norm(delta))
            if length > 1e-12:
                step = min(length, dt)  # unit top speed
                q_new = nodes_q[j] + delta * (step / length)
            else:
                q_new = nodes_q[j].copy()  # wait in place
            t_new = nodes_t[j] + dt
            if not self._segment_free(
                mode, q_base, sl, nodes_q[j], nodes_t[j], q_new, t_new, moving
            ):
                continue
            nodes_q.append(q_new)
            nodes_t.append(t_new)
            parents.append(j)
            dg = float(np.linalg.norm(q_goal - q_new))
            if dg < 1e-12:
                goal_id = len(nodes_q) - 1
                break
            if dg <= self.config.steer_range:
                t_arr = t_new + dg
                if self._segment_free(
                    mode, q_base, sl, q_new, t_new, q_goal, t_arr, moving
                ):
                    nodes_q.append(q_goal.copy())
                    nodes_t.append(t_arr)
                    parents.append(len(nodes_q) - 2)
                    goal_id = len(nodes_q) - 1
                    break
        if goal_id is None:
            return None
        chain = []
        j = goal_id
        while j >= 0:
            chain.append((nodes_t[j], nodes_q[j]))
            j = parents[j]
        chain.reverse()
        return chain
