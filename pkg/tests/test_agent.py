import numpy as np
import pytest

from cgrail.agent import Agent, VARIANTS, VariantConfig
from cgrail.config import Params
from cgrail.context import BLANK_KEY, raw_key
from cgrail.snapshot import SnapshotFormatError, load_agent, save_agent
from cgrail.world import default_scene


def make_agent(variant="c-grail", seed=0, trace=None, **params):
    return Agent(VARIANTS[variant], Params(**params), default_scene(),
                 np.random.default_rng(seed), trace=trace)


class TestVariantSemantics:
    def test_bandit_stays_on_blank_key(self):
        agent = make_agent("bandit", seed=3)
        logs = [agent.run_trial() for _ in range(600)]
        keys = {log.key for log in logs if log.goal >= 0}
        assert keys == {BLANK_KEY}
        for g in range(len(agent.goal_map)):
            assert list(agent.registry.keys_for(g)) == [BLANK_KEY]
            # one expert pair per goal
            arms = [a for (gg, k, a) in agent.experts if gg == g]
            assert sorted(arms) == [0, 1]

    def test_bandit_never_grows_ucf(self):
        agent = make_agent("bandit", seed=3)
        for _ in range(400):
            agent.run_trial()
        assert agent.ucf == {}

    def test_c_transfer_uses_raw_nine_bit_keys(self):
        agent = make_agent("c-transfer", seed=1)
        logs = [agent.run_trial() for _ in range(1500)]
        keys = {log.key for log in logs if log.goal >= 0}
        assert all(len(k) == 9 for k in keys)
        distinct = max(agent.registry.size(g) for g in range(len(agent.goal_map)))
        assert 16 < distinct <= 512

    def test_c_transfer_experts_created_lazily(self):
        agent = make_agent("c-transfer", seed=1)
        for _ in range(50):
            agent.run_trial()
        n_keys = sum(agent.registry.size(g) for g in range(len(agent.goal_map)))
        assert len(agent.experts) == 2 * n_keys
        assert n_keys < 3 * 512

    def test_trial_termination_contract(self):
        agent = make_agent(seed=2)
        for _ in range(300):
            log = agent.run_trial()
            if log.touch == "none":
                assert log.steps == 700
            else:
                assert log.steps <= 700

    def test_discovery_closure_exactly_three_goals(self):
        for seed in (0, 1, 2):
            agent = make_agent(seed=seed)
            for _ in range(2500):
                agent.run_trial()
            assert len(agent.goal_map) == 3

    def test_babble_until_first_goal(self):
        agent = make_agent(seed=0)
        saw_babble = False
        for _ in range(200):
            log = agent.run_trial()
            if log.goal == -1:
                saw_babble = True
                assert log.key == ()
            else:
                break
        assert saw_babble or len(agent.goal_map) > 0


class TestTraceEquivalence:
    def test_five_trials_match_hand_traced_sequence(self):
        """The component-call order of the per-trial loop is pinned: mask ->
        per-goal context matching (with registration) -> goal selection ->
        prior read -> transfer plan -> arm pick -> end-of-trial updates."""
        trace = []
        agent = make_agent("c-grail", seed=11, trace=trace)
        # force a deterministic mask script via a stub rng for sampling:
        # instead, run the real loop and REPLAY the trace structurally.
        logs = [agent.run_trial() for _ in range(5)]
        # rebuild the expected event skeleton from the logs
        i = 0
        for log in logs:
            assert trace[i][0] == "mask"
            i += 1
            n_goals_before = len(log.wsr)  # wsr covers goals known at end
            g_known = []
            while trace[i][0] == "cm":
                g_known.append(trace[i][1])
                i += 1
                if trace[i][0] == "register":
                    assert trace[i][1] == g_known[-1]
                    i += 1
            if log.goal == -1:
                assert trace[i][0] == "babble"
                i += 1
                while i < len(trace) and trace[i][0] == "discover":
                    i += 1
                continue
            assert trace[i] == ("select_goal", log.goal, log.key)
            i += 1
            assert trace[i][0] == "prior" and trace[i][3] == log.prior
            i += 1
            assert trace[i][0] == "plan"
            assert (trace[i][1] == "transfer") == (log.transfer_source is not None)
            i += 1
            assert trace[i] == ("select_expert", log.arm)
            i += 1
            while trace[i][0] == "discover":
                i += 1
            if log.transfer_source is not None:
                assert trace[i] == ("commit_transfer", log.transfer_committed)
                i += 1
            if log.ucf_added:
                assert trace[i][0] == "ucf_grow"
                i += 1
            assert trace[i][0] == "delta_c" and trace[i][3] == log.delta_c
            i += 1
        assert i == len(trace)


class TestAblationIdentity:
    def test_cgrail_with_scd_off_raw_keys_is_c_transfer(self):
        """Same seeds, same flags => byte-identical behavior: the named
        variant is nothing but its flag combination."""
        flags = VariantConfig("ablated", use_context_keys=True, raw_keys=True,
                              use_scd=False, use_transfer=True)
        a = Agent(flags, Params(), default_scene(), np.random.default_rng(5))
        b = make_agent("c-transfer", seed=5)
        for _ in range(400):
            assert a.run_trial() == b.run_trial()

    def test_cgrail_with_transfer_off_is_smart_c_bandit(self):
        flags = VariantConfig("ablated", use_context_keys=True, raw_keys=False,
                              use_scd=True, use_transfer=False)
        a = Agent(flags, Params(), default_scene(), np.random.default_rng(6))
        b = make_agent("smart-c-bandit", seed=6)
        for _ in range(400):
            assert a.run_trial() == b.run_trial()


class TestSnapshot:
    def test_round_trip_preserves_behavior(self, tmp_path):
        agent = make_agent(seed=4)
        for _ in range(300):
            agent.run_trial()
        path = tmp_path / "snap.zip"
        save_agent(agent, path)
        clone = load_agent(path)
        for _ in range(100):
            assert agent.run_trial() == clone.run_trial()

    def test_round_trip_bytes_stable(self, tmp_path):
        agent = make_agent(seed=4)
        for _ in range(50):
            agent.run_trial()
        p1 = tmp_path / "a.zip"
        p2 = tmp_path / "b.zip"
        save_agent(agent, p1)
        save_agent(agent, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        agent = make_agent(seed=4)
        for _ in range(30):
            agent.run_trial()
        path = tmp_path / "snap.zip"
        save_agent(agent, path)
        data = path.read_bytes()
        bad = tmp_path / "bad.zip"
        bad.write_bytes(data[: len(data) // 2])
        with pytest.raises(SnapshotFormatError):
            load_agent(bad)

    def test_version_mismatch_rejected(self, tmp_path):
        import json
        import zipfile

        agent = make_agent(seed=4)
        agent.run_trial()
        path = tmp_path / "snap.zip"
        save_agent(agent, path)
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            rest = {n: zf.read(n) for n in zf.namelist() if n != "meta.json"}
        meta["version"] = 99
        bad = tmp_path / "bad.zip"
        with zipfile.ZipFile(bad, "w") as zf:
            zf.writestr("meta.json", json.dumps(meta))
            for n, payload in rest.items():
                zf.writestr(n, payload)
        with pytest.raises(SnapshotFormatError):
            load_agent(bad)

    def test_size_grows_with_discovered_contexts(self, tmp_path):
        sizes = []
        agent = make_agent("c-transfer", seed=9)
        checkpoints = (50, 400, 1200)
        done = 0
        for i, n in enumerate(checkpoints):
            for _ in range(n - done):
                agent.run_trial()
            done = n
            p = tmp_path / f"s{i}.zip"
            save_agent(agent, p)
            sizes.append((sum(agent.registry.size(g) for g in range(len(agent.goal_map))),
                          p.stat().st_size))
        assert sizes[0][0] < sizes[1][0] < sizes[2][0]
        assert sizes[0][1] < sizes[1][1] < sizes[2][1]
        # roughly linear: bytes per context stable within 2x
        per0 = sizes[1][1] / max(sizes[1][0], 1)
        per1 = sizes[2][1] / max(sizes[2][0], 1)
        assert 0.5 < per0 / per1 < 2.0
