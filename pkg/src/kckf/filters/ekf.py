"""Extended Kalman filter and the gyro-only integrator baseline."""

from __future__ import annotations

import numpy as np
from numba import njit

from .._linalg import matmul_abt_into, matmul_into, matvec_into
from ..models import (
    ImuSample,
    NoiseParams,
    load_measurement_into,
    measurement_noise_cov,
    observation_jacobian_into,
    observe_into,
)
from ..quaternion import as_quaternion, as_rate, check_dt, normalize_into, process_noise_into, transition_into
from .cubature import (
    gain_update_core,
    predict_only_finish,
    raise_for_status,
    single_step_arrays,
    store_state,
)
from .state import OK, STATE_DEGENERATE, FilterState


@njit(cache=True)
def ekf_predict_core(F, q, P, Q, work, q_pred, P_pred):
    # the process model is linear in q, so this prediction is exact
    matvec_into(F, q, q_pred)
    matmul_into(F, P, work)
    matmul_abt_into(work, F, P_pred)
    for r in range(4):
        for c in range(4):
            P_pred[r, c] = P_pred[r, c] + Q[r, c]


@njit(cache=True, inline="always")
def ekf_update_core(q_pred, P_pred, z, R, m_n, m_d, H, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q_out, P_out):
    observation_jacobian_into(q_pred, m_n, m_d, H)
    observe_into(q_pred, m_n, m_d, zhat)
    # Pqz = P H^T (4x6); Pzz = H P H^T + R
    matmul_abt_into(P_pred, H, Pqz)
    matmul_into(H, Pqz, Pzz)
    for r in range(6):
        for c in range(r, 6):
            v = 0.5 * (Pzz[r, c] + Pzz[c, r])
            Pzz[r, c] = v + R[r, c]
            Pzz[c, r] = v + R[c, r]
    return gain_update_core(q_pred, P_pred, z, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q_out, P_out)


@njit(cache=True)
def run_ekf(q0, P0, dt, gyro, acc, mag, valid, gyro_var, R, out_q, out_P, store_cov):
    """EKF over a preprocessed dataset; returns ``(status, samples processed)``."""
    q = q0.copy()
    P = P0.copy()
    F = np.empty((4, 4))
    G = np.empty((4, 3))
    Q = np.empty((4, 4))
    work4 = np.empty((4, 4))
    tmp4 = np.empty(4)
    q_pred = np.empty(4)
    P_pred = np.empty((4, 4))
    z = np.empty(6)
    zhat = np.empty(6)
    H = np.empty((6, 4))
    Pzz = np.empty((6, 6))
    L6 = np.zeros((6, 6))
    Pqz = np.empty((4, 6))
    Kt = np.empty((6, 4))
    for k in range(dt.shape[0]):
        transition_into(gyro[k, 0], gyro[k, 1], gyro[k, 2], dt[k], F)
        process_noise_into(q, dt[k], gyro_var, G, Q)
        ekf_predict_core(F, q, P, Q, work4, q_pred, P_pred)
        if valid[k]:
            m_n, m_d = load_measurement_into(acc, mag, k, z)
            status = ekf_update_core(q_pred, P_pred, z, R, m_n, m_d, H, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q, P)
        else:
            status = predict_only_finish(q_pred, P_pred, q, P)
        if status != OK:
            return status, k
        store_state(k, q, P, out_q, out_P, store_cov)
    return OK, dt.shape[0]


@njit(cache=True)
def run_gyro(q0, P0, dt, gyro, out_q, out_P, store_cov):
    """Dead-reckon a dataset from the gyro alone; ``P0`` is carried unchanged."""
    F = np.empty((4, 4))
    tmp = np.empty(4)
    q = q0.copy()
    for k in range(dt.shape[0]):
        transition_into(gyro[k, 0], gyro[k, 1], gyro[k, 2], dt[k], F)
        matvec_into(F, q, tmp)
        if not normalize_into(tmp, q):
            return STATE_DEGENERATE, k
        store_state(k, q, P0, out_q, out_P, store_cov)
    return OK, dt.shape[0]


def ekf_predict(state: FilterState, omega, dt: float, Q) -> tuple[np.ndarray, np.ndarray]:
    """``(F q, F P F^T + Q)``."""
    wx, wy, wz = as_rate(omega)
    F = np.empty((4, 4))
    transition_into(wx, wy, wz, check_dt(dt), F)
    q_pred = np.empty(4)
    P_pred = np.empty((4, 4))
    ekf_predict_core(F, state.q, state.P, np.ascontiguousarray(Q, dtype=np.float64), np.empty((4, 4)), q_pred, P_pred)
    return q_pred, P_pred


def ekf_step(state: FilterState, sample: ImuSample, noise: NoiseParams, dt: float) -> FilterState:
    """One EKF cycle with the analytic observation Jacobian."""
    out_q = np.empty((1, 4))
    out_P = np.empty((1, 4, 4))
    status, _ = run_ekf(
        state.q, state.P, *single_step_arrays(sample, dt),
        float(noise.gyro_var), measurement_noise_cov(noise), out_q, out_P, True,
    )
    raise_for_status(status, "ekf step")
    return FilterState(out_q[0], out_P[0])


def gyro_only_step(state: FilterState, omega, dt: float) -> FilterState:
    """Dead-reckon the attitude from the gyro alone; P is carried unchanged."""
    gyro = as_rate(omega).reshape(1, 3)
    out_q = np.empty((1, 4))
    status, _ = run_gyro(
        as_quaternion(state.q), state.P, np.array([check_dt(dt)]), gyro, out_q, np.empty((1, 4, 4)), False
    )
    raise_for_status(status, "gyro-only step")
    return FilterState(out_q[0], state.P)


__all__ = ["ekf_predict", "ekf_step", "gyro_only_step", "run_ekf", "run_gyro"]
