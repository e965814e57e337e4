"""Agent snapshots: a deterministic zip of a JSON manifest plus npy arrays.

np.savez stamps wall-clock times into the archive, which would break
byte-level reproducibility, so entries are written with a pinned epoch.
Restoring rebuilds the agent exactly: weights bit-for-bit, rng state,
registries, histories and windowed-success buffers.
"""

from __future__ import annotations

import io
import json
import zipfile
from collections import deque

import numpy as np

from . import experts as ex
from .agent import Agent, VariantConfig
from .config import Params
from .context import key_from_str, key_str
from .world import Rect, SceneConfig

FORMAT = "cgrail-snapshot"
VERSION = 1

_EPOCH = (1980, 1, 1, 0, 0, 0)


class SnapshotFormatError(RuntimeError):
    """Unreadable, truncated or incompatible snapshot file."""


def _write_entry(zf: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, payload)


def _array_bytes(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.lib.format.write_array(buf, np.ascontiguousarray(arr), allow_pickle=False)
    return buf.getvalue()


def _scene_dict(s: SceneConfig) -> dict:
    return {
        "target_centers": [list(c) for c in s.target_centers],
        "target_radius": s.target_radius,
        "target_draw_radius": s.target_draw_radius,
        "obstacle_rects": [[r.x0, r.y0, r.x1, r.y1] for r in s.obstacle_rects],
        "arm_bases": [list(b) for b in s.arm_bases],
        "link_lengths": list(s.link_lengths),
        "joint_low": list(s.joint_low),
        "joint_high": list(s.joint_high),
        "max_joint_step": s.max_joint_step,
        "home_pose": list(s.home_pose),
        "view": list(s.view),
    }


def _scene_from_dict(d: dict) -> SceneConfig:
    return SceneConfig(
        target_centers=tuple(tuple(c) for c in d["target_centers"]),
        target_radius=d["target_radius"],
        target_draw_radius=d["target_draw_radius"],
        obstacle_rects=tuple(Rect(*r) for r in d["obstacle_rects"]),
        arm_bases=tuple(tuple(b) for b in d["arm_bases"]),
        link_lengths=tuple(d["link_lengths"]),
        joint_low=tuple(d["joint_low"]),
        joint_high=tuple(d["joint_high"]),
        max_joint_step=d["max_joint_step"],
        home_pose=tuple(d["home_pose"]),
        view=tuple(d["view"]),
    )


def save_agent(agent: Agent, path) -> None:
    """Write the complete agent state; callable between trials only."""
    slots = sorted(agent.experts.keys(), key=lambda k: (k[0], key_str(k[1]), k[2]))
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "flags": vars(agent.flags),
        "params": vars(agent.params),
        "scene": _scene_dict(agent.scene),
        "trial_index": agent.trial_index,
        "rng_state": agent.rng.bit_generator.state,
        "goal_capacity": agent.goal_map.capacity,
        "n_goals": len(agent.goal_map),
        "ucf": {str(g): list(slots_) for g, slots_ in agent.ucf.items()},
        "registry": {
            str(g): [[key_str(k), t] for k, t in keys.items()]
            for g, keys in agent.registry.known.items()
        },
        "competence": [[g, key_str(k), v] for (g, k), v in sorted(
            agent.competence.values.items(), key=lambda x: (x[0][0], key_str(x[0][1])))],
        "cp_history": [[g, key_str(k), list(buf)] for (g, k), buf in sorted(
            agent.history.buffers.items(), key=lambda x: (x[0][0], key_str(x[0][1])))],
        "goal_values": [[g, key_str(k), v] for (g, k), v in sorted(
            agent.selector.goal_values.items(), key=lambda x: (x[0][0], key_str(x[0][1])))],
        "expert_values": [[g, key_str(k), a, v] for (g, k, a), v in sorted(
            agent.selector.expert_values.items(),
            key=lambda x: (x[0][0], key_str(x[0][1]), x[0][2]))],
        "experts": [[g, key_str(k), a] for g, k, a in slots],
        "critic_b": [agent.experts[s].critic_b for s in slots],
        "noise_d": [agent.noises[s].decrease for s in slots],
        "wsr": {str(g): list(d) for g, d in agent.wsr.items()},
    }
    with zipfile.ZipFile(path, "w") as zf:
        _write_entry(zf, "meta.json", json.dumps(meta, sort_keys=True).encode())
        if len(agent.goal_map):
            imgs = np.stack([img.pixels for img in agent.goal_map.images])
            _write_entry(zf, "goal_images.npy", _array_bytes(imgs))
        for i, s in enumerate(slots):
            net = agent.experts[s]
            _write_entry(zf, f"e{i}_cw.npy", _array_bytes(net.critic_w))
            _write_entry(zf, f"e{i}_aw.npy", _array_bytes(net.actor_w))
            _write_entry(zf, f"e{i}_ab.npy", _array_bytes(net.actor_b))


def load_agent(path, trace: list | None = None) -> Agent:
    """Rebuild an agent from a snapshot; raises SnapshotFormatError on
    truncated files or version mismatches."""
    from .goals import EventImage

    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            if meta.get("format") != FORMAT:
                raise SnapshotFormatError(f"not a {FORMAT} file")
            if meta.get("version") != VERSION:
                raise SnapshotFormatError(
                    f"snapshot version {meta.get('version')} unsupported (want {VERSION})")
            arrays = {}
            for name in zf.namelist():
                if name.endswith(".npy"):
                    arrays[name] = np.lib.format.read_array(
                        io.BytesIO(zf.read(name)), allow_pickle=False)
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, ValueError, EOFError) as e:
        raise SnapshotFormatError(f"unreadable snapshot: {e}") from e

    flags = VariantConfig(**meta["flags"])
    params = Params(**meta["params"])
    scene = _scene_from_dict(meta["scene"])
    rng = np.random.default_rng()
    rng.bit_generator.state = meta["rng_state"]
    agent = Agent(flags, params, scene, rng, trace=trace)
    agent.trial_index = meta["trial_index"]
    agent.goal_map.capacity = meta["goal_capacity"]
    if meta["n_goals"]:
        imgs = arrays["goal_images.npy"]
        agent.goal_map.images = [EventImage(imgs[i]) for i in range(meta["n_goals"])]
    agent.ucf = {int(g): list(v) for g, v in meta["ucf"].items()}
    agent.registry.known = {
        int(g): {key_from_str(ks): t for ks, t in keys}
        for g, keys in meta["registry"].items()
    }
    agent.competence.values = {(g, key_from_str(ks)): v for g, ks, v in meta["competence"]}
    for g, ks, buf in meta["cp_history"]:
        d = deque(buf, maxlen=2 * agent.history.pt)
        agent.history.buffers[(g, key_from_str(ks))] = d
    agent.selector.goal_values = {(g, key_from_str(ks)): v for g, ks, v in meta["goal_values"]}
    agent.selector.expert_values = {
        (g, key_from_str(ks), a): v for g, ks, a, v in meta["expert_values"]}
    for i, (g, ks, a) in enumerate(meta["experts"]):
        key = key_from_str(ks)
        net = ex.ExpertNet(
            critic_w=arrays[f"e{i}_cw.npy"].copy(),
            critic_b=meta["critic_b"][i],
            actor_w=arrays[f"e{i}_aw.npy"].copy(),
            actor_b=arrays[f"e{i}_ab.npy"].copy(),
        )
        agent.experts[(g, key, a)] = net
        agent.noises[(g, key, a)] = ex.NoiseState(
            decrease=meta["noise_d"][i], base_sd=params.noise_sd)
    for g, buf in meta["wsr"].items():
        agent.wsr[int(g)] = deque(buf, maxlen=params.success_window)
    return agent
