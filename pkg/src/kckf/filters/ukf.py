"""Unscented Kalman filter over the same quaternion models.

Sigma points are ``q`` and ``q +- sqrt(nq + lam) * S[:, j]``. With a small
``alpha`` the central weight is huge and negative (about -1e6 for
alpha = 1e-3), so means are accumulated as ``X0 + sum_i Wi (Xi - X0)``
and covariances from deviations; both are algebraically the standard
weighted sums because the mean weights add to one.
"""

from __future__ import annotations

from math import sqrt

import numpy as np
from numba import njit

from .._linalg import cholesky_jitter_into, matvec_into
from ..errors import InvalidArgumentError
from ..models import ImuSample, NoiseParams, load_measurement_into, measurement_noise_cov, observe_into
from ..quaternion import as_rate, check_dt, process_noise_into, transition_into
from .cubature import (
    cholesky_sqrt,
    gain_update_core,
    predict_only_finish,
    raise_for_status,
    single_step_arrays,
    store_state,
)
from .state import COVARIANCE_DEGENERATE, NQ, OK, FilterState, UkfWeights


def ukf_weights(alpha: float = 1e-3, beta: float = 2.0, kappa: float = 0.0, nq: int = NQ) -> UkfWeights:
    """Scaled unscented-transform weights.

    ``lam = alpha^2 (nq + kappa) - nq``; ``W0m = lam / (nq + lam)``;
    ``W0c = W0m + (1 - alpha^2 + beta)``; ``Wi = 1 / (2 (nq + lam))``.
    """
    lam = alpha * alpha * (nq + kappa) - nq
    denom = nq + lam
    if denom == 0.0 or not np.isfinite(denom):
        raise InvalidArgumentError("nq + lambda must be nonzero")
    wm0 = lam / denom
    return UkfWeights(
        wm0=wm0,
        wc0=wm0 + (1.0 - alpha * alpha + beta),
        wi=1.0 / (2.0 * denom),
        lam=lam,
        alpha=alpha,
        beta=beta,
        kappa=kappa,
        nq=nq,
    )


@njit(cache=True)
def sigma_points_into(q, S, scale, X):
    for r in range(4):
        X[0, r] = q[r]
    for j in range(4):
        for r in range(4):
            d = scale * S[r, j]
            X[1 + j, r] = q[r] + d
            X[5 + j, r] = q[r] - d


@njit(cache=True)
def weighted_mean_into(Y, wi, out):
    n_pts, dim = Y.shape
    for r in range(dim):
        acc = 0.0
        for i in range(1, n_pts):
            acc += Y[i, r] - Y[0, r]
        out[r] = Y[0, r] + wi * acc


@njit(cache=True)
def ukf_predict_core(F, S, q, Q, scale, wc0, wi, X, Y, q_pred, P_pred):
    sigma_points_into(q, S, scale, X)
    for i in range(X.shape[0]):
        matvec_into(F, X[i], Y[i])
    weighted_mean_into(Y, wi, q_pred)
    for r in range(4):
        for c in range(r, 4):
            d0r = Y[0, r] - q_pred[r]
            d0c = Y[0, c] - q_pred[c]
            acc = 0.0
            for i in range(1, Y.shape[0]):
                acc += (Y[i, r] - q_pred[r]) * (Y[i, c] - q_pred[c])
            v = wc0 * d0r * d0c + wi * acc + Q[r, c]
            P_pred[r, c] = v
            P_pred[c, r] = v


@njit(cache=True, inline="always")
def ukf_update_core(
    q_pred, P_pred, z, R, m_n, m_d, scale, wc0, wi, S, work4, tmp4, X, Z, zhat, Pzz, Pqz, L6, Kt, q_out, P_out
):
    if not cholesky_jitter_into(P_pred, S, work4):
        return COVARIANCE_DEGENERATE
    sigma_points_into(q_pred, S, scale, X)
    n_pts = X.shape[0]
    for i in range(n_pts):
        observe_into(X[i], m_n, m_d, Z[i])
    weighted_mean_into(Z, wi, zhat)
    for r in range(6):
        for c in range(r, 6):
            acc = 0.0
            for i in range(1, n_pts):
                acc += (Z[i, r] - zhat[r]) * (Z[i, c] - zhat[c])
            v = wc0 * (Z[0, r] - zhat[r]) * (Z[0, c] - zhat[c]) + wi * acc + R[r, c]
            Pzz[r, c] = v
            Pzz[c, r] = v
    # the sigma set is symmetric about q_pred, so X[0] - q_pred is zero
    for r in range(4):
        for c in range(6):
            acc = 0.0
            for i in range(1, n_pts):
                acc += (X[i, r] - q_pred[r]) * (Z[i, c] - zhat[c])
            Pqz[r, c] = wi * acc
    return gain_update_core(q_pred, P_pred, z, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q_out, P_out)


@njit(cache=True)
def run_ukf(q0, P0, dt, gyro, acc, mag, valid, gyro_var, R, scale, wc0, wi, out_q, out_P, store_cov):
    """UKF over a preprocessed dataset; returns ``(status, samples processed)``."""
    q = q0.copy()
    P = P0.copy()
    F = np.empty((4, 4))
    G = np.empty((4, 3))
    Q = np.empty((4, 4))
    S = np.zeros((4, 4))
    work4 = np.empty((4, 4))
    tmp4 = np.empty(4)
    X = np.empty((9, 4))
    Y = np.empty((9, 4))
    Z = np.empty((9, 6))
    q_pred = np.empty(4)
    P_pred = np.empty((4, 4))
    z = np.empty(6)
    zhat = np.empty(6)
    Pzz = np.empty((6, 6))
    L6 = np.zeros((6, 6))
    Pqz = np.empty((4, 6))
    Kt = np.empty((6, 4))
    for k in range(dt.shape[0]):
        transition_into(gyro[k, 0], gyro[k, 1], gyro[k, 2], dt[k], F)
        process_noise_into(q, dt[k], gyro_var, G, Q)
        if not cholesky_jitter_into(P, S, work4):
            return COVARIANCE_DEGENERATE, k
        ukf_predict_core(F, S, q, Q, scale, wc0, wi, X, Y, q_pred, P_pred)
        if valid[k]:
            m_n, m_d = load_measurement_into(acc, mag, k, z)
            status = ukf_update_core(
                q_pred, P_pred, z, R, m_n, m_d, scale, wc0, wi,
                S, work4, tmp4, X, Z, zhat, Pzz, Pqz, L6, Kt, q, P,
            )
        else:
            status = predict_only_finish(q_pred, P_pred, q, P)
        if status != OK:
            return status, k
        store_state(k, q, P, out_q, out_P, store_cov)
    return OK, dt.shape[0]


def sigma_scale(weights: UkfWeights) -> float:
    return sqrt(weights.nq + weights.lam)


def ukf_predict(state: FilterState, omega, dt: float, Q, weights: UkfWeights) -> tuple[np.ndarray, np.ndarray]:
    """Unscented prediction of (q_pred, P_pred); exposed for linear-map checks."""
    wx, wy, wz = as_rate(omega)
    F = np.empty((4, 4))
    transition_into(wx, wy, wz, check_dt(dt), F)
    S = cholesky_sqrt(state.P)
    q_pred = np.empty(4)
    P_pred = np.empty((4, 4))
    ukf_predict_core(
        F, S, state.q, np.ascontiguousarray(Q, dtype=np.float64), sigma_scale(weights),
        weights.wc0, weights.wi, np.empty((9, 4)), np.empty((9, 4)), q_pred, P_pred,
    )
    return q_pred, P_pred


def ukf_step(
    state: FilterState,
    sample: ImuSample,
    noise: NoiseParams,
    dt: float,
    weights: UkfWeights | None = None,
) -> FilterState:
    """One UKF cycle; sigma points are redrawn for the update."""
    weights = weights or ukf_weights()
    if weights.nq != NQ:
        raise InvalidArgumentError(f"weights were built for nq={weights.nq}, the state has {NQ}")
    out_q = np.empty((1, NQ))
    out_P = np.empty((1, NQ, NQ))
    status, _ = run_ukf(
        state.q, state.P, *single_step_arrays(sample, dt),
        float(noise.gyro_var), measurement_noise_cov(noise),
        sigma_scale(weights), weights.wc0, weights.wi, out_q, out_P, True,
    )
    raise_for_status(status, "ukf step")
    return FilterState(out_q[0], out_P[0])


__all__ = ["run_ukf", "ukf_predict", "ukf_step", "ukf_weights"]
