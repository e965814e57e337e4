import numpy as np
import pytest

from cgrail.goals import (EventImage, GoalCapacityError, GoalLookupError,
                          GoalMap, detect_change, match_goal, store_goal)
from cgrail.world import FRAME_H, FRAME_W, Frame, default_scene, rasterize, reset_state


def frame(pixels=None, mask=None):
    z = np.zeros((FRAME_H, FRAME_W), dtype=np.uint8)
    return Frame(pixels=z.copy() if pixels is None else pixels,
                 arm_mask=z.copy() if mask is None else mask)


def blob(r0, c0, h=3, w=3):
    px = np.zeros((FRAME_H, FRAME_W), dtype=np.uint8)
    px[r0:r0 + h, c0:c0 + w] = 1
    return px


def lit_event(target, cfg=None):
    """Event image produced by the real rasterizer when a target lights."""
    cfg = cfg or default_scene()
    s = reset_state(np.zeros(9), cfg)
    before = rasterize(s, cfg)
    s2 = s.copy()
    s2.target_lit[target] = True
    after = rasterize(s2, cfg)
    return detect_change(before, after)


class TestDetectChange:
    def test_identical_frames_give_none(self):
        f = frame(blob(10, 10))
        assert detect_change(f, f) is None

    def test_target_switch_yields_unit_norm_disc(self):
        cfg = default_scene()
        ev = lit_event(0, cfg)
        assert ev is not None
        assert np.linalg.norm(ev.pixels) == pytest.approx(1.0, abs=1e-9)
        # supported exactly on the lit disc
        s = reset_state(np.zeros(9), cfg)
        s.target_lit[0] = True
        disc = rasterize(s, cfg).pixels
        assert np.all(disc[ev.pixels > 0] == 1)

    def test_arm_only_changes_excluded(self):
        prev = frame(mask=blob(5, 5))
        curr = frame(mask=blob(6, 6))
        assert detect_change(prev, curr) is None

    def test_masked_pixels_zeroed_under_either_frame(self):
        prev = frame()
        curr = frame(pixels=blob(10, 10, 4, 4))
        curr.arm_mask = blob(10, 10, 4, 2)  # covers half the new blob
        ev = detect_change(prev, curr)
        assert ev is not None
        assert ev.pixels[10:14, 10:12].sum() == 0
        assert ev.pixels[10:14, 12:14].sum() > 0


class TestGoalStore:
    def test_first_insertion_gets_id_zero(self):
        gm = GoalMap()
        img = EventImage(blob(10, 10).astype(float))
        assert store_goal(img, gm) == (0, True)

    def test_idempotent_second_store(self):
        gm = GoalMap()
        img = EventImage(blob(10, 10).astype(float))
        store_goal(img, gm)
        assert store_goal(img, gm) == (0, False)

    def test_three_distinct_targets_in_discovery_order(self):
        gm = GoalMap()
        cfg = default_scene()
        for i, target in enumerate((2, 0, 1)):
            gid, new = store_goal(lit_event(target, cfg), gm)
            assert (gid, new) == (i, True)
        for i, target in enumerate((2, 0, 1)):
            gid, new = store_goal(lit_event(target, cfg), gm)
            assert (gid, new) == (i, False)

    def test_capacity_error(self):
        gm = GoalMap(capacity=1)
        store_goal(EventImage(blob(10, 10).astype(float)), gm)
        with pytest.raises(GoalCapacityError):
            store_goal(EventImage(blob(40, 40).astype(float)), gm)


class TestMatchGoal:
    def test_self_match(self):
        gm = GoalMap()
        img = EventImage(blob(10, 10).astype(float))
        store_goal(img, gm)
        assert match_goal(img, 0, gm) == 1

    def test_disjoint_supports_give_zero(self):
        gm = GoalMap()
        store_goal(EventImage(blob(10, 10).astype(float)), gm)
        other = EventImage(blob(40, 40).astype(float))
        assert match_goal(other, 0, gm) == 0

    def test_same_target_across_trials_matches(self):
        gm = GoalMap()
        cfg = default_scene()
        store_goal(lit_event(1, cfg), gm)
        assert match_goal(lit_event(1, cfg), 0, gm) == 1

    def test_unknown_goal_id(self):
        gm = GoalMap()
        with pytest.raises(GoalLookupError):
            match_goal(EventImage(blob(0, 0).astype(float)), 3, gm)

    def test_threshold_insensitivity_on_clean_events(self):
        """Real target events classify identically for any threshold in
        [0.1, 0.99]: same-target products are ~1 and cross-target exactly 0."""
        cfg = default_scene()
        gm = GoalMap()
        for t in range(3):
            store_goal(lit_event(t, cfg), gm)
        for t in range(3):
            ev = lit_event(t, cfg)
            for theta in (0.1, 0.3, 0.5, 0.9, 0.99):
                for g in range(3):
                    assert match_goal(ev, g, gm, theta) == (1 if g == t else 0)


class TestNormalization:
    def test_stored_images_stay_unit_norm(self):
        gm = GoalMap()
        cfg = default_scene()
        for t in (0, 1, 2, 0, 1, 2):
            store_goal(lit_event(t, cfg), gm)
        for img in gm.images:
            assert np.linalg.norm(img.pixels) == pytest.approx(1.0, abs=1e-9)

    def test_empty_event_rejected(self):
        with pytest.raises(ValueError):
            EventImage(np.zeros((FRAME_H, FRAME_W)))
