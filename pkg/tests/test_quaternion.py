from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from kckf.errors import DegenerateStateError, InvalidArgumentError
from kckf.quaternion import (
    dcm,
    euler_to_quat,
    noise_input_matrix,
    normalize,
    omega_matrix,
    process_noise_cov,
    quat_to_euler,
    quats_to_euler,
    transition_matrix,
)
from strategies import dts, rates, unit_quats

H = np.sqrt(2.0) / 2.0


def test_omega_zero_rate_is_zero():
    assert np.array_equal(omega_matrix([0.0, 0.0, 0.0]), np.zeros((4, 4)))


def test_omega_x_rate_pattern():
    Om = omega_matrix([1.0, 0.0, 0.0])
    assert np.array_equal(Om[0], [0.0, -1.0, 0.0, 0.0])
    assert np.array_equal(Om[:, 0], [0.0, 1.0, 0.0, 0.0])


@given(rates)
def test_omega_matches_hamilton_product_and_is_skew(w):
    Om = omega_matrix(w)
    np.testing.assert_allclose(Om, oracles.omega(w), atol=0)
    assert np.array_equal(Om.T, -Om)


@given(dts)
def test_transition_zero_rate_is_identity(dt):
    assert np.array_equal(transition_matrix([0, 0, 0], dt), np.eye(4))


def test_transition_hand_example():
    F = transition_matrix([2.0, 0.0, 0.0], 0.01)
    expected = np.eye(4)
    expected[1, 0], expected[0, 1] = 0.01, -0.01
    expected[2, 3], expected[3, 2] = 0.01, -0.01
    np.testing.assert_allclose(F, expected, atol=1e-16)


@given(rates, dts)
def test_transition_determinant_positive(w, dt):
    # det(I + s K) for skew K with K^2 = -|w|^2 I is (1 + s^2 |w|^2)^2
    s = 0.5 * dt
    F = transition_matrix(w, dt)
    np.testing.assert_allclose(np.linalg.det(F), (1 + s * s * w @ w) ** 2, rtol=1e-12)


@pytest.mark.parametrize("dt", [0.0, -0.01, np.nan])
def test_transition_rejects_bad_dt(dt):
    with pytest.raises(InvalidArgumentError):
        transition_matrix([0, 0, 0], dt)


def test_noise_input_identity_example():
    G = noise_input_matrix([1.0, 0.0, 0.0, 0.0], 0.01)
    np.testing.assert_allclose(G, 0.005 * np.array([[0, 0, 0], [1, 0, 0], [0, -1, 0], [0, 0, -1]]), atol=0)


def test_noise_input_zero_quaternion():
    assert np.array_equal(np.abs(noise_input_matrix([0, 0, 0, 0], 0.01)), np.zeros((4, 3)))


@given(unit_quats(), dts)
def test_noise_input_columns_and_null_space(q, dt):
    G = noise_input_matrix(q, dt)
    np.testing.assert_allclose(np.linalg.norm(G, axis=0), dt / 2, rtol=1e-12)
    assert np.max(np.abs(G.T @ q)) <= 1e-14
    # columns are orthogonal: G^T G = (dt/2)^2 I
    np.testing.assert_allclose(G.T @ G, (dt / 2) ** 2 * np.eye(3), atol=1e-18)


def test_process_noise_examples():
    assert np.array_equal(process_noise_cov([1, 0, 0, 0], 0.01, 0.0), np.zeros((4, 4)))
    Q = process_noise_cov([1, 0, 0, 0], 0.01, 1e-3)
    np.testing.assert_allclose(Q, 1e-3 * 2.5e-5 * np.diag([0, 1, 1, 1]), atol=1e-22)
    with pytest.raises(InvalidArgumentError):
        process_noise_cov([1, 0, 0, 0], 0.01, -1.0)


@given(unit_quats(), dts, st.floats(1e-6, 1.0))
def test_process_noise_null_space_and_oracle(q, dt, var):
    Q = process_noise_cov(q, dt, var)
    assert abs(q @ Q @ q) <= 1e-15 * np.abs(Q).max()
    # independent construction: G from Hamilton products q * (0, e_j)
    G = oracles.noise_input(q, dt)
    np.testing.assert_allclose(Q, var * G @ G.T, atol=1e-15 * var)


def test_dcm_examples():
    np.testing.assert_array_equal(dcm([1, 0, 0, 0]), np.eye(3))
    C = dcm([H, H, 0, 0])
    np.testing.assert_allclose(C[:, 2], [0.0, 1.0, 0.0], atol=1e-15)


@given(unit_quats())
def test_dcm_matches_rotation_oracle(q):
    C = dcm(q)
    np.testing.assert_allclose(C, oracles.dcm(q), atol=1e-14)
    assert np.max(np.abs(C @ C.T - np.eye(3))) < 1e-12
    assert np.array_equal(dcm(-q), C)


def test_dcm_tolerates_small_drift_only():
    dcm(np.array([1.0 + 5e-7, 0, 0, 0]))
    with pytest.raises(InvalidArgumentError):
        dcm(np.array([1.0 + 1e-5, 0, 0, 0]))


def test_euler_examples():
    assert quat_to_euler([1, 0, 0, 0]) == (0.0, 0.0, 0.0)
    np.testing.assert_allclose(quat_to_euler([H, H, 0, 0]), (90.0, 0.0, 0.0), atol=1e-12)
    np.testing.assert_allclose(quat_to_euler([H, 0, 0, H]), (0.0, 0.0, 90.0), atol=1e-12)


@given(st.floats(-179, 179), st.floats(-88.9, 88.9), st.floats(-179, 179))
def test_euler_round_trip_and_zyx_convention(roll, pitch, yaw):
    q = euler_to_quat(roll, pitch, yaw)
    np.testing.assert_allclose(quat_to_euler(q), (roll, pitch, yaw), atol=1e-9)
    # body-to-global is Rz Ry Rx; dcm is its transpose
    np.testing.assert_allclose(dcm(q), oracles.body_to_global(roll, pitch, yaw).T, atol=1e-12)


def test_euler_gimbal_lock_pins_roll():
    q = euler_to_quat(30.0, 90.0, 10.0)
    r, p, y = quat_to_euler(q)
    assert r == 0.0 and abs(p - 90.0) < 1e-6
    # the rotation is preserved even though roll moved into yaw
    np.testing.assert_allclose(dcm(euler_to_quat(r, p, y)), dcm(q), atol=1e-6)


def test_quats_to_euler_rejects_bad_shape():
    with pytest.raises(InvalidArgumentError):
        quats_to_euler(np.zeros((3, 3)))


def test_normalize_examples():
    assert np.array_equal(normalize([2, 0, 0, 0]), [1, 0, 0, 0])
    np.testing.assert_allclose(normalize([1, 1, 1, 1]), [0.5] * 4, atol=0)
    with pytest.raises(DegenerateStateError):
        normalize([0, 0, 0, 1e-300])


@pytest.mark.parametrize("q", [[1, 0, 0, 0], [0.5, 0.5, 0.5, 0.5], [0.6, 0.8, 0, 0], [0, 0, 0.28, 0.96]])
def test_normalize_leaves_exact_unit_unchanged(q):
    assert np.max(np.abs(normalize(q) - np.array(q, dtype=float))) <= 1e-16


@given(unit_quats())
def test_normalize_idempotent_to_rounding(q):
    # the norm of a float unit vector is 1 only to a few ulps
    assert np.max(np.abs(normalize(q) - q)) <= 2 * np.finfo(float).eps
