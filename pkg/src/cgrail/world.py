"""Planar two-arm reaching world.

Two 4-joint kinematic arms, 3 circular targets and 9 rectangular obstacle
slots (3 per target: left / middle / right). Touch is end-effector point
containment; there is no contact dynamics. An 80x60 binary rasterizer
produces the visual frames: lit targets are drawn into ``pixels``, arm
links only into ``arm_mask``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

FRAME_W = 80
FRAME_H = 60

ARM_LEFT = 0
ARM_RIGHT = 1

TRIAL_STEPS = 700


class ContractViolation(ValueError):
    """An operation was called outside its stated preconditions."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle (meters)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, p) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1


@dataclass(frozen=True)
class SceneConfig:
    """Static scene geometry. All lengths in meters, angles in radians."""

    target_centers: tuple  # 3 x (x, y); touch discs
    target_radius: float  # touch radius
    target_draw_radius: float  # rendered disc radius (< target_radius)
    obstacle_rects: tuple  # 9 x Rect, slots 3i..3i+2 flank target i
    arm_bases: tuple  # 2 x (x, y)
    link_lengths: tuple  # 4 lengths, same for both arms
    joint_low: tuple  # 4 lower joint limits
    joint_high: tuple  # 4 upper joint limits
    max_joint_step: float  # rad per control step
    home_pose: tuple  # 4 angles, both arms start here
    view: tuple = (-1.2, 1.2, -1.05, 0.75)  # raster bounds (xmin, xmax, ymin, ymax)

    @property
    def reach(self) -> float:
        return float(sum(self.link_lengths))


def default_scene() -> SceneConfig:
    """Scene used by the benchmark: targets reachable by both arms, each
    flanked by three thin obstacles (left/middle/right slots). Joint 1 is
    limited to the upper half-plane; both arms start pointing straight up."""
    # one wide overhead bar per target (forces a detour when present) and
    # two small flanking posts tucked in low-traffic pockets beside it
    def group(cx, cy):
        return (
            Rect(cx - 0.36, cy - 0.23, cx - 0.32, cy - 0.13),  # left post
            Rect(cx - 0.30, cy + 0.30, cx + 0.30, cy + 0.34),  # overhead bar
            Rect(cx + 0.32, cy - 0.23, cx + 0.36, cy - 0.13),  # right post
        )

    rects = group(-0.66, 0.3) + group(0.0, 0.42) + group(0.66, 0.3)
    return SceneConfig(
        target_centers=((-0.66, 0.3), (0.0, 0.42), (0.66, 0.3)),
        target_radius=0.26,
        target_draw_radius=0.08,
        obstacle_rects=rects,
        arm_bases=((-0.26, 0.0), (0.26, 0.0)),
        link_lengths=(0.32, 0.28, 0.22, 0.18),
        joint_low=(0.35, -1.1, -1.1, -1.1),
        joint_high=(np.pi - 0.35, 1.1, 1.1, 1.1),
        max_joint_step=0.06,
        home_pose=(np.pi / 2, 0.0, 0.0, 0.0),
        view=(-1.2, 1.2, -0.75, 1.05),
    )


@dataclass
class WorldState:
    """Trial-scoped world state. A plain value: cheap to copy, never shared."""

    joint_angles: np.ndarray  # (2, 4) both arms
    obstacle_mask: np.ndarray  # (9,) uint8 presence bits
    target_lit: np.ndarray  # (3,) bool
    step: int
    active_arm: int

    def copy(self) -> "WorldState":
        return WorldState(
            joint_angles=self.joint_angles.copy(),
            obstacle_mask=self.obstacle_mask.copy(),
            target_lit=self.target_lit.copy(),
            step=self.step,
            active_arm=self.active_arm,
        )


@dataclass(frozen=True)
class TouchEvent:
    """Outcome of a containment check.

    kind is one of "none", "target", "obstacle"; index identifies the
    target (0..2) or obstacle slot (0..8).
    """

    kind: str
    index: int = -1
    effector_pos: tuple = (0.0, 0.0)

    @property
    def is_none(self) -> bool:
        return self.kind == "none"


@dataclass
class Frame:
    """80x60 binary view: pixels holds lit targets, arm_mask the arm links."""

    pixels: np.ndarray  # (FRAME_H, FRAME_W) uint8
    arm_mask: np.ndarray  # (FRAME_H, FRAME_W) uint8


def forward_kinematics(joints, arm: int, cfg: SceneConfig) -> np.ndarray:
    """Effector position of the 4-link chain; zero angles point along +x."""
    joints = np.asarray(joints, dtype=float)
    lo = np.asarray(cfg.joint_low)
    hi = np.asarray(cfg.joint_high)
    if np.any(joints < lo - 1e-12) or np.any(joints > hi + 1e-12):
        raise ContractViolation(f"joints {joints} outside limits")
    ang = np.cumsum(joints)
    lengths = np.asarray(cfg.link_lengths)
    x = cfg.arm_bases[arm][0] + float(np.dot(lengths, np.cos(ang)))
    y = cfg.arm_bases[arm][1] + float(np.dot(lengths, np.sin(ang)))
    return np.array([x, y])


def link_points(joints, arm: int, cfg: SceneConfig) -> np.ndarray:
    """Joint positions along the chain, base first: (5, 2)."""
    ang = np.cumsum(np.asarray(joints, dtype=float))
    lengths = np.asarray(cfg.link_lengths)
    pts = np.empty((5, 2))
    pts[0] = cfg.arm_bases[arm]
    pts[1:, 0] = pts[0, 0] + np.cumsum(lengths * np.cos(ang))
    pts[1:, 1] = pts[0, 1] + np.cumsum(lengths * np.sin(ang))
    return pts


def reset_state(obstacle_mask, cfg: SceneConfig, active_arm: int = ARM_LEFT) -> WorldState:
    """Fresh trial state: both arms at the home pose, all targets unlit."""
    joints = np.tile(np.asarray(cfg.home_pose, dtype=float), (2, 1))
    return WorldState(
        joint_angles=joints,
        obstacle_mask=np.asarray(obstacle_mask, dtype=np.uint8).copy(),
        target_lit=np.zeros(3, dtype=bool),
        step=0,
        active_arm=active_arm,
    )


def apply_action(state: WorldState, commands, cfg: SceneConfig) -> WorldState:
    """Move the active arm: each command in [0,1] maps to a velocity in
    [-max_joint_step, +max_joint_step]; angles clamp at the joint limits."""
    c = np.clip(np.asarray(commands, dtype=float), 0.0, 1.0)
    new = state.copy()
    a = new.active_arm
    new.joint_angles[a] += (2.0 * c - 1.0) * cfg.max_joint_step
    np.clip(new.joint_angles[a], cfg.joint_low, cfg.joint_high, out=new.joint_angles[a])
    new.step = state.step + 1
    return new


def check_touch(state: WorldState, cfg: SceneConfig) -> TouchEvent:
    """Containment check for the active arm's effector. Obstacles win ties."""
    pos = forward_kinematics(state.joint_angles[state.active_arm], state.active_arm, cfg)
    for j, rect in enumerate(cfg.obstacle_rects):
        if state.obstacle_mask[j] and rect.contains(pos):
            return TouchEvent("obstacle", j, (pos[0], pos[1]))
    r2 = cfg.target_radius ** 2
    for i, (cx, cy) in enumerate(cfg.target_centers):
        if (pos[0] - cx) ** 2 + (pos[1] - cy) ** 2 <= r2:
            return TouchEvent("target", i, (pos[0], pos[1]))
    return TouchEvent("none", -1, (pos[0], pos[1]))


def _pixel_grid(cfg: SceneConfig):
    xmin, xmax, ymin, ymax = cfg.view
    resx = (xmax - xmin) / FRAME_W
    resy = (ymax - ymin) / FRAME_H
    return xmin, ymax, resx, resy


def _world_to_pixel(p, cfg: SceneConfig):
    xmin, ymax, resx, resy = _pixel_grid(cfg)
    col = int((p[0] - xmin) / resx)
    row = int((ymax - p[1]) / resy)
    return row, col


def rasterize(state: WorldState, cfg: SceneConfig) -> Frame:
    """Render the state: lit targets as filled discs into pixels, both
    arms' link segments into arm_mask. Deterministic."""
    pixels = np.zeros((FRAME_H, FRAME_W), dtype=np.uint8)
    mask = np.zeros((FRAME_H, FRAME_W), dtype=np.uint8)
    xmin, ymax, resx, resy = _pixel_grid(cfg)

    # pixel-center coordinate axes
    xs = xmin + (np.arange(FRAME_W) + 0.5) * resx
    ys = ymax - (np.arange(FRAME_H) + 0.5) * resy
    r2 = cfg.target_draw_radius ** 2
    for i, (cx, cy) in enumerate(cfg.target_centers):
        if state.target_lit[i]:
            dx2 = (xs - cx) ** 2
            dy2 = (ys - cy) ** 2
            pixels[np.add.outer(dy2, dx2) <= r2] = 1

    step = 0.4 * min(resx, resy)
    for arm in (ARM_LEFT, ARM_RIGHT):
        pts = link_points(state.joint_angles[arm], arm, cfg)
        for k in range(4):
            seg = pts[k + 1] - pts[k]
            n = max(2, int(np.hypot(*seg) / step) + 1)
            ts = np.linspace(0.0, 1.0, n)
            px = pts[k, 0] + ts * seg[0]
            py = pts[k, 1] + ts * seg[1]
            cols = np.floor((px - xmin) / resx).astype(int)
            rows = np.floor((ymax - py) / resy).astype(int)
            ok = (cols >= 0) & (cols < FRAME_W) & (rows >= 0) & (rows < FRAME_H)
            mask[rows[ok], cols[ok]] = 1
    return Frame(pixels=pixels, arm_mask=mask)


def sample_obstacle_mask(rng: np.random.Generator, p: float = 0.5) -> np.ndarray:
    """Each of the 9 slots present independently with probability p."""
    return (rng.random(9) < p).astype(np.uint8)
