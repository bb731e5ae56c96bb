from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from kckf.errors import InvalidArgumentError
from kckf.models import (
    ImuData,
    LowPassConfig,
    MagneticReference,
    NoiseParams,
    magnetic_reference,
    measurement_noise_cov,
    observation_jacobian,
    observe,
    observe_block,
    preprocess,
    state_transition,
)
from kckf.quaternion import transition_matrix
from strategies import dts, rates, unit_quats

H2 = np.sqrt(2.0) / 2.0
dips = st.floats(-1.0, 1.0).map(lambda d: MagneticReference(np.sqrt(1 - d * d), d))


def test_state_transition_examples():
    q = np.array([0.3, -0.1, 0.5, 0.8])
    assert np.array_equal(state_transition(q, [0, 0, 0], 0.01), q)
    np.testing.assert_allclose(state_transition([1, 0, 0, 0], [2, 0, 0], 0.01), [1, 0.01, 0, 0], atol=1e-17)


@given(unit_quats(), unit_quats(), st.floats(-3, 3), st.floats(-3, 3), rates, dts)
def test_state_transition_is_linear(q1, q2, a, b, w, dt):
    lhs = state_transition(a * q1 + b * q2, w, dt)
    rhs = a * state_transition(q1, w, dt) + b * state_transition(q2, w, dt)
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * max(1.0, abs(a) + abs(b)) * 4


def test_magnetic_reference_examples():
    r = magnetic_reference([0, 0, 1], [0, 0, 1])
    assert r.m_d == 1.0 and r.m_n == 0.0
    r = magnetic_reference([0, 0, 1], [H2, 0, H2])
    np.testing.assert_allclose(r, (H2, H2), atol=1e-16)


def test_magnetic_reference_clamps_rounding_overshoot():
    # acc . mag slightly above 1 must not produce NaN
    v = np.array([1.0, 1e-5, 0.0])
    v /= np.linalg.norm(v)
    m = v * (1 + 4e-10)
    r = magnetic_reference(v, m)
    assert r.m_n == 0.0 and r.m_d == 1.0


def test_magnetic_reference_rejects_non_unit():
    with pytest.raises(InvalidArgumentError):
        magnetic_reference([0, 0, 2], [1, 0, 0])


@given(unit_quats(), unit_quats())
def test_magnetic_reference_north_is_nonnegative(a, b):
    r = magnetic_reference(a[:3] / np.linalg.norm(a[:3]), b[:3] / np.linalg.norm(b[:3]))
    assert r.m_n >= 0.0 and -1.0 <= r.m_d <= 1.0


def test_observe_identity():
    ref = MagneticReference(0.6, 0.8)
    np.testing.assert_array_equal(observe([1, 0, 0, 0], ref), [0, 0, 1, 0.6, 0, 0.8])


@given(unit_quats(), dips)
def test_observe_matches_rotation_oracle_and_block_route(q, ref):
    z = observe(q, ref)
    np.testing.assert_allclose(z, oracles.observe(q, ref.m_n, ref.m_d), atol=1e-14)
    assert np.max(np.abs(z - observe_block(q, ref))) < 1e-13
    assert abs(np.linalg.norm(z[:3]) - 1) <= 1e-12
    assert abs(np.linalg.norm(z[3:]) - 1) <= 1e-12


def test_observe_block_agreement_1000_quaternions(rng):
    ref = MagneticReference(np.cos(0.9), np.sin(0.9))
    worst = 0.0
    for _ in range(1000):
        q = oracles.random_unit_quat(rng)
        worst = max(worst, np.max(np.abs(observe(q, ref) - observe_block(q, ref))))
    assert worst < 1e-13


def test_observe_rejects_non_unit():
    with pytest.raises(InvalidArgumentError):
        observe([2, 0, 0, 0], MagneticReference(1, 0))


@given(unit_quats(), dips)
def test_jacobian_matches_finite_differences(q, ref):
    H = observation_jacobian(q, ref)
    Hfd = oracles.fd_jacobian(lambda x: oracles.observe(x, ref.m_n, ref.m_d), q)
    assert np.max(np.abs(H - Hfd)) <= 1e-5 * np.max(np.abs(Hfd))


def test_measurement_noise_examples():
    assert np.array_equal(measurement_noise_cov(NoiseParams(1e-3, 0.0, 0.0)), np.zeros((6, 6)))
    assert np.array_equal(measurement_noise_cov(NoiseParams()), 1e-2 * np.eye(6))
    assert np.array_equal(measurement_noise_cov(NoiseParams(1e-3, 1.0, 4.0)), np.diag([1.0, 1, 1, 4, 4, 4]))
    with pytest.raises(InvalidArgumentError):
        NoiseParams(acc_var=-1.0)


def _data(acc, mag):
    acc = np.asarray(acc, dtype=float)
    n = acc.shape[0]
    return ImuData(np.arange(n) * 0.01, np.zeros((n, 3)), acc, np.asarray(mag, dtype=float))


def test_preprocess_normalizes():
    d = preprocess(_data([[0, 0, 9.81]] * 3, [[0.3, 0, 0.4]] * 3))
    np.testing.assert_allclose(d.acc, [[0, 0, 1]] * 3, atol=0)
    np.testing.assert_allclose(d.mag, [[0.6, 0, 0.8]] * 3, atol=1e-16)
    assert d.valid.all()


def test_preprocess_constant_input_dc_gain():
    d = preprocess(_data([[1.0, 2.0, 2.0]] * 50, [[0, 3.0, 4.0]] * 50), LowPassConfig(0.2))
    np.testing.assert_allclose(d.acc[-1], [1 / 3, 2 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(d.mag[-1], [0, 0.6, 0.8], atol=1e-15)


def test_preprocess_step_response_follows_recurrence():
    alpha = 0.3
    n = 20
    # the step is on a component that is later normalized, so check the
    # unnormalized direction: y_k = alpha x_k + (1 - alpha) y_{k-1}
    acc = np.array([[1.0, 0, 0]] + [[1.0, 1.0, 0]] * (n - 1))
    d = preprocess(_data(acc, [[1, 0, 0]] * n), LowPassConfig(alpha))
    y = acc[0].copy()
    for k in range(1, n):
        y = alpha * acc[k] + (1 - alpha) * y
        np.testing.assert_allclose(d.acc[k], y / np.linalg.norm(y), atol=1e-15)


def test_preprocess_flags_zero_and_nonfinite():
    acc = [[0, 0, 1], [0, 0, 0], [np.nan, 0, 1], [0, 0, 1]]
    d = preprocess(_data(acc, [[1, 0, 0]] * 4), LowPassConfig(1.0))
    assert d.valid.tolist() == [True, False, False, True]
    assert np.all(np.isfinite(d.acc)) and np.all(np.isfinite(d.mag))


@given(st.lists(st.tuples(*[st.floats(-50, 50)] * 6), min_size=1, max_size=30))
def test_preprocess_outputs_unit_or_flagged(rows):
    a = np.array(rows)
    d = preprocess(_data(a[:, :3], a[:, 3:]))
    assert np.all(np.isfinite(d.acc)) and np.all(np.isfinite(d.mag))
    ok = d.valid
    np.testing.assert_allclose(np.linalg.norm(d.acc[ok], axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(d.mag[ok], axis=1), 1.0, atol=1e-12)


def test_lowpass_alpha_bounds():
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(InvalidArgumentError):
            LowPassConfig(bad)


def test_imudata_shape_checks():
    with pytest.raises(InvalidArgumentError):
        ImuData(np.zeros(3), np.zeros((2, 3)), np.zeros((3, 3)), np.zeros((3, 3)))


def test_transition_linear_in_state():
    F = transition_matrix([0.1, -0.2, 0.3], 0.01)
    q = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(state_transition(q, [0.1, -0.2, 0.3], 0.01), F @ q, atol=0)
