import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgrail.motivation import CompetenceTable, CPHistory, delta_c, predict, update

KEY = ((1, 0),)


def fresh():
    return CompetenceTable(), CPHistory()


class TestPredict:
    def test_unseen_pair_is_zero(self):
        table, _ = fresh()
        assert predict(0, KEY, table) == 0.0

    def test_fifty_successes_converge(self):
        table, hist = fresh()
        for _ in range(50):
            update(0, KEY, 1, table, hist)
        # EMA fixed point oracle: 1 - (1 - rate)^n
        assert predict(0, KEY, table) == pytest.approx(1 - 0.9 ** 50, abs=1e-12)
        assert predict(0, KEY, table) >= 0.99

    def test_alternating_outcomes_stay_mid(self):
        table, hist = fresh()
        for i in range(200):
            update(0, KEY, i % 2, table, hist)
        assert 0.3 < predict(0, KEY, table) < 0.7

    def test_pair_isolation(self):
        table, hist = fresh()
        update(0, KEY, 1, table, hist)
        assert predict(1, KEY, table) == 0.0
        assert predict(0, ((1, 1),), table) == 0.0


class TestUpdate:
    def test_from_zero(self):
        table, hist = fresh()
        cp = update(0, KEY, 1, table, hist)
        assert cp == 1.0
        assert predict(0, KEY, table) == pytest.approx(0.1)

    def test_perfect_prediction_has_zero_error(self):
        table, hist = fresh()
        table.values[(0, KEY)] = 1.0
        assert update(0, KEY, 1, table, hist) == 0.0

    def test_matches_scalar_recurrence_oracle(self):
        table, hist = fresh()
        rng = np.random.default_rng(0)
        chi = 0.0
        for _ in range(300):
            outcome = int(rng.random() < 0.6)
            expected_cp = abs(outcome - chi)
            chi = chi + 0.1 * (outcome - chi)
            cp = update(0, KEY, outcome, table, hist)
            assert cp == pytest.approx(expected_cp, abs=1e-15)
            assert predict(0, KEY, table) == pytest.approx(chi, abs=1e-12)


class TestDeltaC:
    def test_empty_and_single_sample_give_zero(self):
        table, hist = fresh()
        assert delta_c(0, KEY, hist) == 0.0
        update(0, KEY, 1, table, hist)
        assert delta_c(0, KEY, hist) == 0.0

    def test_constant_stream_gives_zero(self):
        _, hist = fresh()
        buf = hist.buffer(0, KEY)
        for _ in range(40):
            buf.append(0.25)
        assert delta_c(0, KEY, hist) == pytest.approx(0.0, abs=1e-15)

    def test_window_arithmetic(self):
        _, hist = fresh()
        buf = hist.buffer(0, KEY)
        for _ in range(20):
            buf.append(1.0)
        for _ in range(20):
            buf.append(0.8)
        assert delta_c(0, KEY, hist) == pytest.approx(0.2, abs=1e-12)

    def test_partial_buffer_split_older_gets_extra(self):
        _, hist = fresh()
        buf = hist.buffer(0, KEY)
        for v in (1.0, 1.0, 0.4):  # older [1.0, 1.0], newer [0.4]
            buf.append(v)
        assert delta_c(0, KEY, hist) == pytest.approx(1.0 - 0.4, abs=1e-12)

    def test_decaying_errors_give_positive_signal(self):
        _, hist = fresh()
        buf = hist.buffer(0, KEY)
        values = [0.9 ** i for i in range(40)]
        for v in values:
            buf.append(v)
            if len(buf) >= 2:
                assert delta_c(0, KEY, hist) > 0

    def test_ring_buffer_caps_at_forty(self):
        table, hist = fresh()
        for _ in range(100):
            update(0, KEY, 1, table, hist)
        assert len(hist.buffers[(0, KEY)]) == 40

    def test_rotting_to_zero_under_sustained_success(self):
        table, hist = fresh()
        for _ in range(400):
            update(0, KEY, 1, table, hist)
        assert abs(delta_c(0, KEY, hist)) < 1e-8


@given(st.lists(st.floats(0.0, 1.0), min_size=0, max_size=80))
@settings(max_examples=200, deadline=None)
def test_delta_c_bounded(values):
    _, hist = fresh()
    buf = hist.buffer(0, KEY)
    for v in values:
        buf.append(v)
    assert -1.0 <= delta_c(0, KEY, hist) <= 1.0
