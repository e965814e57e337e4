"""The four architecture variants and their shared per-trial loop.

Every variant runs the same loop; flags only switch which context key a
goal perceives (blank / raw 9-bit / feature-filtered), whether failures
grow the feature lists, and whether transfer is attempted. Goal
discovery is always active.

Trial order: sample obstacle mask -> context matching and registration
for every known goal -> goal selection (motor babbling while no goal is
known) -> own/transfer plan -> arm selection -> up to T control steps
with per-step TD learning -> end-of-trial updates (transfer commit,
feature acquisition, competence, motivation, selector values, noise).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import context as ctx
from . import experts as ex
from . import goals as gl
from . import motivation as mo
from . import selection as se
from . import transfer as tr
from .config import Params
from .world import (ARM_LEFT, ARM_RIGHT, SceneConfig, TouchEvent, WorldState,
                    rasterize, reset_state, sample_obstacle_mask)


@dataclass(frozen=True)
class VariantConfig:
    """Component switches. use_context_keys=False pins every goal to the
    blank context; raw_keys=True uses the unfiltered 9-bit mask."""

    name: str
    use_context_keys: bool
    raw_keys: bool
    use_scd: bool
    use_transfer: bool


VARIANTS = {
    "bandit": VariantConfig("bandit", False, False, False, False),
    "c-transfer": VariantConfig("c-transfer", True, True, False, True),
    "smart-c-bandit": VariantConfig("smart-c-bandit", True, False, True, False),
    "c-grail": VariantConfig("c-grail", True, False, True, True),
}


@dataclass(frozen=True)
class TrialLog:
    trial: int
    goal: int  # -1 for a babbling trial
    key: tuple
    arm: int
    steps: int
    success: int
    reward: float
    touch: str  # "target" | "obstacle" | "none"
    touch_index: int
    prior: float
    posterior: float
    delta_c: float
    q: float
    transfer_source: tuple | None
    transfer_committed: bool
    new_contexts: tuple  # ((goal, key), ...)
    discovered: tuple  # goal ids stored this trial
    ucf_added: tuple  # slots added to the pursued goal's ucf
    q_snapshot: tuple  # ((goal, key, value), ...) at selection time
    wsr: tuple  # per-goal windowed success rates at trial end
    phi_sizes: tuple  # per-goal |known contexts|
    ucf_sizes: tuple  # per-goal |ucf|


class _TouchChecker:
    """Precomputed fast containment test, equivalent to world.check_touch."""

    def __init__(self, scene: SceneConfig):
        self.scene = scene
        self.rects = [(r.x0, r.y0, r.x1, r.y1) for r in scene.obstacle_rects]
        self.centers = [(float(x), float(y)) for x, y in scene.target_centers]
        self.r2 = scene.target_radius ** 2
        self.lengths = [float(x) for x in scene.link_lengths]
        self.bases = [(float(x), float(y)) for x, y in scene.arm_bases]

    def effector(self, joints, arm: int):
        l1, l2, l3, l4 = self.lengths
        a1 = joints[0]
        a2 = a1 + joints[1]
        a3 = a2 + joints[2]
        a4 = a3 + joints[3]
        bx, by = self.bases[arm]
        x = bx + l1 * math.cos(a1) + l2 * math.cos(a2) + l3 * math.cos(a3) + l4 * math.cos(a4)
        y = by + l1 * math.sin(a1) + l2 * math.sin(a2) + l3 * math.sin(a3) + l4 * math.sin(a4)
        return x, y

    def check(self, state: WorldState) -> TouchEvent:
        x, y = self.effector(state.joint_angles[state.active_arm], state.active_arm)
        mask = state.obstacle_mask
        for j, (x0, y0, x1, y1) in enumerate(self.rects):
            if mask[j] and x0 <= x <= x1 and y0 <= y <= y1:
                return TouchEvent("obstacle", j, (x, y))
        for i, (cx, cy) in enumerate(self.centers):
            dx = x - cx
            dy = y - cy
            if dx * dx + dy * dy <= self.r2:
                return TouchEvent("target", i, (x, y))
        return TouchEvent("none", -1, (x, y))


class Agent:
    """One experiment's learner: owns all per-goal machinery and the rng."""

    def __init__(self, flags: VariantConfig, params: Params, scene: SceneConfig,
                 rng: np.random.Generator, trace: list | None = None):
        self.flags = flags
        self.params = params
        self.scene = scene
        self.rng = rng
        self.trace = trace
        self.trial_index = 0

        self.goal_map = gl.GoalMap(capacity=params.goal_capacity)
        self.ucf: dict = {}  # goal -> ordered slot list
        self.registry = ctx.ContextRegistry()
        self.competence = mo.CompetenceTable(ema_rate=params.chi_ema)
        self.history = mo.CPHistory(pt=params.window)
        self.selector = se.SelectorState(tau_goal=params.tau_goal,
                                         tau_expert=params.tau_expert,
                                         gamma=params.value_ema)
        self.transfer_policy = tr.TransferPolicy(
            learning_threshold=params.learning_threshold,
            transfer_threshold=params.transfer_threshold,
            transfer_probability=params.transfer_probability)
        self.experts: dict = {}  # (g, key, arm) -> ExpertNet
        self.noises: dict = {}  # (g, key, arm) -> NoiseState
        self.wsr: dict = {}  # goal -> deque of outcomes (success window)

        self.encoder = ex.RbfEncoder()
        self.touch = _TouchChecker(scene)
        self._jlow = np.asarray(scene.joint_low, dtype=float)
        self._jspan = np.asarray(scene.joint_high, dtype=float) - self._jlow

    # -- plumbing -----------------------------------------------------

    def _t(self, *event):
        if self.trace is not None:
            self.trace.append(event)

    def goal_key(self, mask, g: int) -> tuple:
        if not self.flags.use_context_keys:
            return ctx.BLANK_KEY
        if self.flags.raw_keys:
            return ctx.raw_key(mask)
        return ctx.filter_context(mask, self.ucf.get(g, ()))

    def _create_expert_pair(self, g: int, key: tuple) -> None:
        for arm in (ARM_LEFT, ARM_RIGHT):
            self.experts[(g, key, arm)] = ex.ExpertNet()
            self.noises[(g, key, arm)] = ex.NoiseState(base_sd=self.params.noise_sd)

    def _wsr_deque(self, g: int):
        d = self.wsr.get(g)
        if d is None:
            d = deque(maxlen=self.params.success_window)
            self.wsr[g] = d
        return d

    def _wsr_value(self, g: int) -> float:
        d = self.wsr.get(g)
        if not d:
            return 0.0
        return sum(d) / len(d)

    def _goal_stats(self):
        n = len(self.goal_map)
        wsr = tuple(self._wsr_value(g) for g in range(n))
        phi = tuple(self.registry.size(g) for g in range(n))
        ucf = tuple(len(self.ucf.get(g, ())) for g in range(n))
        return wsr, phi, ucf

    # -- trial --------------------------------------------------------

    def run_trial(self) -> TrialLog:
        trial = self.trial_index
        p = self.params
        mask = sample_obstacle_mask(self.rng, p.obstacle_prob)
        self._t("mask", tuple(int(b) for b in mask))
        state = reset_state(mask, self.scene)

        new_contexts = []
        candidates = []
        for g in range(len(self.goal_map)):
            key = self.goal_key(mask, g)
            self._t("cm", g, key)
            candidates.append((g, key))
            if ctx.register_context(g, key, self.registry, trial):
                self._t("register", g, key)
                self._create_expert_pair(g, key)
                new_contexts.append((g, key))

        if not candidates:
            log = self._babble_trial(trial, state, tuple(new_contexts))
        else:
            log = self._goal_trial(trial, state, candidates, tuple(new_contexts))
        self.trial_index += 1
        return log

    def _babble_trial(self, trial: int, state: WorldState, new_contexts) -> TrialLog:
        self._t("babble")
        arm = int(self.rng.integers(2))
        net = ex.ExpertNet()
        noise = ex.NoiseState(base_sd=self.params.noise_sd)
        sd = noise.start_trial()
        state.active_arm = arm
        res = self._control_loop(state, net, noise, sd, pursued=None, learn=False)
        steps, reward_sum, touch, discovered = res[0], res[1], res[2], res[4]
        wsr, phi, ucf = self._goal_stats()
        return TrialLog(trial=trial, goal=-1, key=(), arm=arm, steps=steps,
                        success=0, reward=reward_sum, touch=touch.kind,
                        touch_index=touch.index, prior=0.0, posterior=0.0,
                        delta_c=0.0, q=0.0, transfer_source=None,
                        transfer_committed=False, new_contexts=new_contexts,
                        discovered=discovered, ucf_added=(),
                        q_snapshot=(), wsr=wsr, phi_sizes=phi, ucf_sizes=ucf)

    def _goal_trial(self, trial: int, state: WorldState, candidates, new_contexts) -> TrialLog:
        p = self.params
        q_snapshot = tuple((g, key, self.selector.goal_values.get((g, key), 0.0))
                           for g, key in candidates)
        g, key = se.select_goal(candidates, self.selector, self.rng)
        self._t("select_goal", g, key)
        prior = mo.predict(g, key, self.competence)
        self._t("prior", g, key, prior)

        plan = tr.TrialPlan()
        if self.flags.use_transfer:
            plan = tr.plan_trial(g, key, self.transfer_policy, self.competence,
                                 self.registry.keys_for(g), self.rng)
        self._t("plan", "transfer" if plan.is_transfer else "own", plan.source_key)

        arm = se.select_expert(g, key, self.selector, self.rng)
        self._t("select_expert", arm)
        target_net = self.experts[(g, key, arm)]
        noise = self.noises[(g, key, arm)]
        if plan.is_transfer:
            # the source expert controls the trial: its policy and its
            # noise level; within-trial learning goes to a throwaway copy
            source_net = self.experts[(g, plan.source_key, arm)]
            acting = source_net.copy()
            acting_noise = ex.NoiseState(
                decrease=self.noises[(g, plan.source_key, arm)].decrease,
                base_sd=self.params.noise_sd)
        else:
            source_net = None
            acting = target_net
            acting_noise = noise
        sd = acting_noise.start_trial()
        state.active_arm = arm

        steps, reward_sum, touch, success, discovered = self._control_loop(
            state, acting, acting_noise, sd, pursued=g, learn=True)

        committed = False
        if plan.is_transfer:
            committed = tr.commit_transfer(source_net, target_net, success == 1)
            self._t("commit_transfer", committed)

        ucf_added: tuple = ()
        if (self.flags.use_scd and touch.kind == "obstacle"
                and steps < p.steps_per_trial):
            f_fail = ctx.extract_failure_features(touch, state)
            before = list(self.ucf.get(g, ()))
            if ctx.record_failure(g, f_fail, prior, self.ucf, p.competence_threshold):
                ucf_added = tuple(s for s in self.ucf[g] if s not in before)
                self._t("ucf_grow", g, ucf_added)

        mo.update(g, key, success, self.competence, self.history)
        posterior = mo.predict(g, key, self.competence)
        dc = mo.delta_c(g, key, self.history)
        self._t("delta_c", g, key, dc)
        q = se.update_goal_value(g, key, dc, self.selector)
        se.update_expert_value(g, key, arm, float(success), self.selector)
        noise.record_outcome(float(success), p.noise_decrease_ema)
        self._wsr_deque(g).append(success)

        wsr, phi, ucf_sizes = self._goal_stats()
        return TrialLog(trial=trial, goal=g, key=key, arm=arm, steps=steps,
                        success=success, reward=reward_sum, touch=touch.kind,
                        touch_index=touch.index, prior=prior, posterior=posterior,
                        delta_c=dc, q=q, transfer_source=plan.source_key,
                        transfer_committed=committed, new_contexts=new_contexts,
                        discovered=discovered, ucf_added=ucf_added,
                        q_snapshot=q_snapshot, wsr=wsr, phi_sizes=phi,
                        ucf_sizes=ucf_sizes)

    def _control_loop(self, state: WorldState, net: ex.ExpertNet,
                      noise: ex.NoiseState, sd: float, pursued: int | None,
                      learn: bool, rng: np.random.Generator | None = None,
                      discover: bool = True):
        """Run up to T steps; returns (steps, reward_sum, touch, success,
        discovered)."""
        p = self.params
        scene = self.scene
        rng = self.rng if rng is None else rng
        arm = state.active_arm
        T = p.steps_per_trial
        max_step = scene.max_joint_step
        jlow = self._jlow
        jhigh = jlow + self._jspan
        encode = self.encoder.encode
        joints = state.joint_angles[arm]

        feats = encode((joints - jlow) / self._jspan)
        total_r = 0.0
        success = 0
        discovered = []
        touch = TouchEvent("none", -1)
        prev_state = state.copy()
        t = 0
        while t < T:
            t += 1
            v_prev = ex.critic_value(feats, net)
            o = ex.actor_output(feats, net)
            cmd = ex.apply_noise(o, noise, rng, sd, p.noise_ema)
            joints += (2.0 * cmd - 1.0) * max_step
            np.clip(joints, jlow, jhigh, out=joints)
            state.step = t
            touch = self.touch.check(state)

            terminal = False
            r = 0.0
            if touch.kind == "target":
                terminal = True
                state.target_lit[touch.index] = True
                ev = gl.detect_change(rasterize(prev_state, scene), rasterize(state, scene))
                if ev is not None:
                    if discover:
                        gid, is_new = gl.store_goal(ev, self.goal_map, p.match_threshold)
                        if is_new:
                            discovered.append(gid)
                            self._t("discover", gid)
                    if pursued is not None and gl.match_goal(ev, pursued, self.goal_map,
                                                             p.match_threshold):
                        r = p.reward_goal
                        success = 1
            elif touch.kind == "obstacle":
                terminal = True
                r = p.reward_obstacle
            elif t == T:
                terminal = True
                r = p.reward_timeout

            if terminal:
                if learn:
                    delta = (r + 0.0) - v_prev
                    ex.learn_step(net, feats, delta, o, cmd, p.critic_lr, p.actor_lr)
                total_r += r
                break

            feats_now = encode((joints - jlow) / self._jspan)
            if learn:
                v_now = ex.critic_value(feats_now, net)
                delta = (r + p.td_discount * v_now) - v_prev
                ex.learn_step(net, feats, delta, o, cmd, p.critic_lr, p.actor_lr)
            total_r += r
            feats = feats_now
            prev_state.joint_angles[arm][:] = joints

        return t, total_r, touch, success, tuple(discovered)
