import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scenesync import ValidationError
from scenesync.geometry import Pose, apply_action, drift_angle, quat_from_axis_angle
from scenesync.scene import Action, ActionKind, ControlPacketObject
from scenesync.sync import (
    GAMMA_MAX,
    GAMMA_MIN,
    DelayHistory,
    DriftVector,
    adapt_probe_rate,
    correct_pose,
    decisions_to_reach,
    drift_matrix,
    drift_value,
    record_delay,
    rtt_to_delay,
)

from oracles import population_stats

Z = (0.0, 0.0, 1.0)
MS = 1e-3


class TestDriftValue:
    def test_velocity_delay_equivalence(self):
        assert drift_value(100, 0.0015) == pytest.approx(0.15)
        assert drift_value(10, 0.015) == pytest.approx(0.15)

    def test_zero_delay(self):
        assert drift_value(73.0, 0.0) == 0.0

    def test_small(self):
        assert drift_value(10, 0.001) == pytest.approx(0.01)

    def test_negative_delay(self):
        with pytest.raises(ValidationError):
            drift_value(1.0, -1e-3)


class TestDriftMatrix:
    def test_outer_product(self):
        m = drift_matrix([10, 100], [0.001, 0.002])
        expected = [[10 * 0.001, 10 * 0.002], [100 * 0.001, 100 * 0.002]]
        assert np.allclose(m.D, expected, rtol=0, atol=1e-15)

    def test_empty_objects(self):
        assert drift_matrix([], [0.001, 0.002, 0.003]).D.shape == (0, 3)

    def test_columns_are_drift_vectors(self):
        S, T = [10.0, 50.0, 100.0], [0.00075, 0.0015]
        m = drift_matrix(S, T)
        for k, t in enumerate(T):
            vec = DriftVector.compute(k, dict(enumerate(S)), t)
            assert list(m.column(k)) == [vec.entries[j] for j in range(len(S))]

    @given(
        st.lists(st.floats(0, 1e3), max_size=8),
        st.lists(st.floats(0, 1.0), max_size=8),
    )
    def test_outer_law_exact(self, S, T):
        D = drift_matrix(S, T).D
        for j, s in enumerate(S):
            for k, t in enumerate(T):
                assert D[j, k] == s * t

    def test_drift_vector_invariant(self):
        v = DriftVector.compute(2, {0: 10.0, 5: 100.0}, 0.0015)
        for j, vel in {0: 10.0, 5: 100.0}.items():
            assert abs(v.entries[j] - vel * 0.0015) <= 1e-12


def _cpo(velocity, kind=ActionKind.ROTATION, direction=Z):
    a = Action(1, kind, direction, velocity, 0.0)
    return ControlPacketObject(0, 0.0, Pose(orientation=quat_from_axis_angle((1.0, 0.0, 0.0), 20.0)), a)


class TestCorrectPose:
    def test_rotation_jump(self):
        cpo = _cpo(100.0)
        expected = apply_action(cpo.pose, cpo.action, 0.015)
        got = correct_pose(cpo, 0.015)
        assert drift_angle(got.orientation, expected.orientation) < 1e-12
        assert drift_angle(got.orientation, cpo.pose.orientation) == pytest.approx(1.5, abs=1e-9)

    def test_zero_delay(self):
        cpo = _cpo(100.0)
        assert correct_pose(cpo, 0.0) == cpo.pose

    def test_zero_velocity(self):
        cpo = _cpo(0.0)
        assert correct_pose(cpo, 0.5) == cpo.pose

    def test_translation(self):
        cpo = _cpo(2.0, ActionKind.TRANSLATION, (1.0, 0.0, 0.0))
        assert correct_pose(cpo, 0.25).position == pytest.approx((0.5, 0, 0))

    def test_since_receipt_adds_up(self):
        cpo = _cpo(40.0)
        a = correct_pose(cpo, 0.01, since_receipt=0.02)
        b = correct_pose(cpo, 0.03)
        assert drift_angle(a.orientation, b.orientation) < 1e-12


class TestRtt:
    def test_lan_value(self):
        assert rtt_to_delay(1.5 * MS) == pytest.approx(0.75 * MS)

    def test_zero(self):
        assert rtt_to_delay(0.0) == 0.0

    def test_three_ms(self):
        assert rtt_to_delay(3 * MS) == pytest.approx(1.5 * MS)

    def test_negative(self):
        with pytest.raises(ValidationError):
            rtt_to_delay(-1.0)


class TestDelayHistory:
    def test_single_sample(self):
        h = record_delay(DelayHistory(), 1.5 * MS)
        assert h.h_mean == pytest.approx(1.5 * MS) and h.sigma == 0.0

    def test_ring_eviction(self):
        h = DelayHistory()
        for _ in range(100):
            record_delay(h, 1.5 * MS)
        record_delay(h, 3.0 * MS)
        assert len(h.samples) == 100
        assert list(h.samples).count(1.5 * MS) == 99

    def test_population_stats(self):
        h = DelayHistory()
        for x in (1, 2, 3):
            record_delay(h, x * MS)
        assert h.h_mean == pytest.approx(2 * MS)
        assert h.sigma == pytest.approx(0.8165 * MS, abs=1e-7)

    @given(st.lists(st.floats(0, 0.1), min_size=1, max_size=300), st.integers(1, 120))
    def test_matches_brute_force(self, xs, p):
        h = DelayHistory(p=p)
        for x in xs:
            record_delay(h, x)
        window = xs[-p:]
        mean, sd = population_stats(window)
        assert list(h.samples) == window
        assert abs(h.h_mean - mean) <= 1e-12
        assert abs(h.sigma - sd) <= 1e-12

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            record_delay(DelayHistory(), -1.0)


def _full_history(mean, sigma, p=100, gamma=1.0):
    """A full window whose population mean/sigma are exactly ``mean``/``sigma``."""
    h = DelayHistory(p=p, gamma_0=gamma)
    for i in range(p):
        record_delay(h, mean + (sigma if i % 2 else -sigma))
    return h


class TestAdaptProbeRate:
    def test_in_band_decreases(self):
        h = _full_history(1.5 * MS, 0.2 * MS)
        assert adapt_probe_rate(h, 1.6 * MS) == 0.5

    def test_out_of_band_increases(self):
        h = _full_history(1.5 * MS, 0.2 * MS)
        assert adapt_probe_rate(h, 2.0 * MS) == 2.0

    def test_zero_sigma_boundary_inclusive(self):
        h = _full_history(1.5 * MS, 0.0)
        assert h.sigma == 0.0
        assert adapt_probe_rate(h, h.h_mean) == 0.5

    def test_bootstrap_leaves_rate(self):
        h = DelayHistory(p=100)
        record_delay(h, 1 * MS)
        assert adapt_probe_rate(h, 5 * MS) == 1.0

    def test_clamps(self):
        h = _full_history(1 * MS, 0.0, gamma=GAMMA_MIN)
        assert adapt_probe_rate(h, 1 * MS) == GAMMA_MIN
        h.gamma_0 = GAMMA_MAX
        assert adapt_probe_rate(h, 9 * MS) == GAMMA_MAX

    def test_reaches_min_on_constant_link(self):
        h = _full_history(1.5 * MS, 0.0)
        n = decisions_to_reach(1.0, GAMMA_MIN)
        assert n == math.ceil(math.log2(1.0 / GAMMA_MIN))
        for _ in range(n):
            adapt_probe_rate(h, 1.5 * MS)
        assert h.gamma_0 == GAMMA_MIN

    def test_step_reaches_max(self):
        h = _full_history(1.5 * MS, 0.0, gamma=GAMMA_MIN)
        n = decisions_to_reach(GAMMA_MIN, GAMMA_MAX)
        for _ in range(n):
            record_delay(h, 5 * MS)
            adapt_probe_rate(h, 5 * MS)
        assert h.gamma_0 == GAMMA_MAX

    @given(st.lists(st.floats(0, 0.05), min_size=1, max_size=400))
    def test_rate_stays_in_bounds(self, xs):
        h = DelayHistory(p=20)
        for x in xs:
            record_delay(h, x)
            adapt_probe_rate(h, x)
            assert GAMMA_MIN <= h.gamma_0 <= GAMMA_MAX

    def test_invalid_config(self):
        with pytest.raises(ValidationError):
            DelayHistory(gamma_min=5, gamma_max=1)
