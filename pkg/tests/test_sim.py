from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kckf.errors import InvalidArgumentError
from kckf.models import LowPassConfig, MagneticReference, magnetic_reference, observe, preprocess
from kckf.quaternion import quat_to_euler, transition_matrix
from kckf.sim import (
    DEFAULT_DIP,
    DEFAULT_NOISE,
    ProfileKind,
    Scenario,
    SensorNoiseModel,
    TrajectoryProfile,
    generate_trajectory,
    inject_acceleration_bursts,
    mag_reference,
    synthesize_measurements,
)


def test_stationary_profile():
    tr = generate_trajectory(TrajectoryProfile("stationary", duration=2.0))
    assert np.array_equal(tr.omega, np.zeros_like(tr.omega))
    assert np.array_equal(tr.q, np.tile([1.0, 0, 0, 0], (len(tr), 1)))


def test_constant_rate_closed_form_yaw():
    tr = generate_trajectory(TrajectoryProfile("constant-rate", duration=10.0, omega=(0, 0, 0.1)))
    # exact z rotation by 1 rad; first-order kinematics plus renormalization
    # keep the yaw to well within 1e-6 rad
    assert abs(np.radians(quat_to_euler(tr.q[-1]).yaw) - 1.0) < 1e-6


def test_walk_profile_grid_and_norm():
    p = TrajectoryProfile("walk-like", duration=30.0, rate=100.0)
    tr = generate_trajectory(p)
    assert len(tr) == 3001
    assert np.array_equal(tr.t, np.arange(3001) / 100.0)
    assert np.max(np.abs(np.linalg.norm(tr.q, axis=1) - 1)) <= 1e-12
    assert np.ptp(tr.omega, axis=0).min() > 0


def test_truth_follows_discrete_kinematics():
    tr = generate_trajectory(TrajectoryProfile("walk-like", duration=2.0))
    for k in range(1, len(tr)):
        q = transition_matrix(tr.omega[k], 0.01) @ tr.q[k - 1]
        np.testing.assert_allclose(tr.q[k], q / np.linalg.norm(q), atol=1e-15)


@pytest.mark.parametrize(
    "kw", [{"rate": 0.0}, {"duration": -1.0}, {"kind": "running"}, {"omega": (np.nan, 0, 0)}]
)
def test_profile_validation(kw):
    with pytest.raises((InvalidArgumentError, ValueError)):
        TrajectoryProfile(**kw)


def test_noise_free_identity_dip_zero():
    tr = generate_trajectory(TrajectoryProfile("stationary", duration=0.05))
    d = synthesize_measurements(tr, SensorNoiseModel(), ref_mag_dip=0.0)
    np.testing.assert_allclose(d.acc, np.tile([0, 0, 1.0], (len(tr), 1)), atol=0)
    np.testing.assert_allclose(d.mag, np.tile([1.0, 0, 0], (len(tr), 1)), atol=1e-16)


def test_default_noise_from_densities():
    assert DEFAULT_NOISE.gyro_std == pytest.approx(np.radians(0.01 * np.sqrt(50)), rel=1e-12)
    assert DEFAULT_NOISE.gyro_std == pytest.approx(1.234e-3, abs=5e-7)
    assert DEFAULT_NOISE.acc_std == pytest.approx(200e-6 * np.sqrt(50), rel=1e-12)
    assert DEFAULT_NOISE.mag_std == pytest.approx(0.2 * np.sqrt(50) / 500, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        SensorNoiseModel(gyro_std=-1.0)


def test_seeded_generation_is_deterministic():
    s = Scenario(TrajectoryProfile("walk-like", duration=5.0), seed=42)
    a, b = s.build()[1], s.build()[1]
    for name in ("t", "gyro", "acc", "mag"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = Scenario(TrajectoryProfile("walk-like", duration=5.0), seed=43).build()[1]
    assert not np.array_equal(a.gyro, c.gyro)


def test_noise_statistics(rng):
    tr = generate_trajectory(TrajectoryProfile("stationary", duration=200.0))
    noise = SensorNoiseModel(0.01, 0.02, 0.03, (0.1, 0.2, 0.3))
    d = synthesize_measurements(tr, noise, seed=3)
    np.testing.assert_allclose(d.gyro.mean(axis=0), (0.1, 0.2, 0.3), atol=5e-4)
    np.testing.assert_allclose(d.gyro.std(axis=0), 0.01, rtol=0.03)
    np.testing.assert_allclose((d.acc - [0, 0, 1]).std(axis=0), 0.02, rtol=0.03)


@given(st.floats(-80, 80), st.integers(0, 1000))
def test_noise_free_synthesis_reproduces_observation(dip, seed):
    p = TrajectoryProfile("walk-like", duration=0.5, q0=tuple(np.random.default_rng(seed).standard_normal(4)))
    tr = generate_trajectory(p)
    raw = synthesize_measurements(tr, SensorNoiseModel(), dip)
    d = preprocess(raw, LowPassConfig(1.0))
    ref = MagneticReference(np.cos(np.radians(dip)), np.sin(np.radians(dip)))
    for k in range(0, len(tr), 7):
        z = np.concatenate([d.acc[k], d.mag[k]])
        assert np.max(np.abs(z - observe(tr.q[k], ref))) <= 1e-12
        r = magnetic_reference(d.acc[k], d.mag[k])
        assert abs(r.m_d - ref.m_d) <= 1e-12


def test_mag_reference():
    np.testing.assert_allclose(mag_reference(DEFAULT_DIP), [np.cos(np.radians(50)), 0, np.sin(np.radians(50))])


def test_burst_injection_only_touches_acc():
    _, raw = Scenario(TrajectoryProfile("stationary", duration=10.0), seed=1).build()
    b = inject_acceleration_bursts(raw, n_bursts=3, duration=0.5, magnitude=0.5, seed=2)
    changed = np.any(b.acc != raw.acc, axis=1)
    assert 0 < changed.sum() <= 3 * 50
    assert np.array_equal(b.gyro, raw.gyro) and np.array_equal(b.mag, raw.mag)
    with pytest.raises(InvalidArgumentError):
        inject_acceleration_bursts(raw, duration=0.0)


def test_profile_kinds():
    assert {k.value for k in ProfileKind} == {"stationary", "constant-rate", "walk-like"}
