"""Cubature Kalman filtering: the literal CKF prediction, the simplified
KCKF prediction, and the measurement update both share.

The two prediction routes are algebraically identical. Because the
process model ``f(q) = F q`` is linear, the eight propagated points are
``F S e_i + F q``, their mean collapses to ``F q`` (the ``+e``/``-e``
halves cancel), and their scatter collapses to ``(F S)(F S)^T``. The KCKF
route computes those closed forms directly and skips the per-point
propagation and the outer-product sum.

Each numbered piece of the two routes is its own kernel so that the
operation counts in :mod:`kckf.flops` can be checked against the code.
"""

from __future__ import annotations

from math import sqrt

import numpy as np
import numpy.typing as npt
from numba import njit

from .._linalg import (
    cho_solve_t_into,
    cholesky_into,
    cholesky_jitter_into,
    matmul_abt_into,
    matmul_into,
    matvec_into,
    symmetrize,
)
from ..errors import (
    CovarianceDegenerateError,
    DegenerateStateError,
    InnovationDegenerateError,
    InvalidArgumentError,
)
from ..models import (
    ImuSample,
    MagneticReference,
    NoiseParams,
    load_measurement_into,
    measurement_noise_cov,
    observe_into,
)
from ..quaternion import (
    Matrix,
    as_rate,
    check_dt,
    normalize_into,
    process_noise_into,
    transition_into,
)
from .state import (
    COVARIANCE_DEGENERATE,
    INNOVATION_DEGENERATE,
    NQ,
    OK,
    STATE_DEGENERATE,
    FilterState,
    PointSource,
    Prediction,
)


def _directions() -> Matrix:
    unit = np.vstack([np.eye(NQ), -np.eye(NQ)])
    return np.ascontiguousarray(sqrt(NQ) * unit)


#: the 2*NQ cubature directions sqrt(NQ) * [1]_i, one per row
CUBATURE_DIRECTIONS = _directions()
CUBATURE_DIRECTIONS.flags.writeable = False


def cubature_directions() -> Matrix:
    """Rows ``e_i = 2 * [1]_i``: +-2 along each quaternion axis."""
    return CUBATURE_DIRECTIONS.copy()


# --- prediction pieces -----------------------------------------------------


@njit(cache=True)
def cubature_points_into(S, center, E, tmp, out):
    """out[i] = S @ E[i] + center."""
    for i in range(E.shape[0]):
        matvec_into(S, E[i], tmp)
        for r in range(center.shape[0]):
            out[i, r] = tmp[r] + center[r]


@njit(cache=True)
def propagate_points_into(F, points, out):
    """out[i] = F @ points[i]."""
    for i in range(points.shape[0]):
        matvec_into(F, points[i], out[i])


@njit(cache=True)
def point_mean_into(points, nq, out):
    """Equal-weight mean ``1/(2 nq) * sum_i points[i]``."""
    n_pts, dim = points.shape
    for r in range(dim):
        acc = points[0, r]
        for i in range(1, n_pts):
            acc = acc + points[i, r]
        out[r] = acc
    inv = 1.0 / (2.0 * nq)
    for r in range(dim):
        out[r] = out[r] * inv


@njit(cache=True)
def point_cov_into(points, mean, Q, nq, P):
    """``1/(2 nq) * sum_i p_i p_i^T - mean mean^T + Q``, summed literally."""
    n_pts, dim = points.shape
    for r in range(dim):
        for c in range(dim):
            P[r, c] = points[0, r] * points[0, c]
    for i in range(1, n_pts):
        for r in range(dim):
            for c in range(dim):
                P[r, c] = P[r, c] + points[i, r] * points[i, c]
    inv = 1.0 / (2.0 * nq)
    for r in range(dim):
        for c in range(dim):
            P[r, c] = P[r, c] * inv - mean[r] * mean[c] + Q[r, c]


@njit(cache=True)
def factor_cov_into(M, Q, P):
    """P = M M^T + Q."""
    matmul_abt_into(M, M, P)
    dim = P.shape[0]
    for r in range(dim):
        for c in range(dim):
            P[r, c] = P[r, c] + Q[r, c]


@njit(cache=True)
def ckf_predict_core(F, S, q, Q, E, nq, tmp, sigma, points, q_pred, P_pred):
    cubature_points_into(S, q, E, tmp, sigma)
    propagate_points_into(F, sigma, points)
    point_mean_into(points, nq, q_pred)
    point_cov_into(points, q_pred, Q, nq, P_pred)


@njit(cache=True)
def kckf_predict_core(F, S, q, Q, E, tmp, M, points, q_pred, P_pred):
    matmul_into(F, S, M)
    matvec_into(F, q, q_pred)
    cubature_points_into(M, q_pred, E, tmp, points)
    factor_cov_into(M, Q, P_pred)


# --- update ----------------------------------------------------------------


@njit(cache=True)
def redraw_points_into(S, center, out):
    """Cubature points ``center +- 2 S[:, j]`` (same set as the E-row form)."""
    for j in range(4):
        for r in range(4):
            d = 2.0 * S[r, j]
            out[j, r] = center[r] + d
            out[4 + j, r] = center[r] - d


@njit(cache=True, inline="always")
def gain_update_core(q_pred, P_pred, z, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q_out, P_out):
    """Kalman correction from already filled ``Pzz`` and ``Pqz``.

    K = Pqz Pzz^-1 via Cholesky (``Kt`` holds K^T); q+ = q_pred + K (z - zhat)
    renormalized; P+ = P_pred - K Pzz K^T symmetrized, evaluated as
    P_pred - Pqz K^T since K Pzz = Pqz. ``q_out``/``P_out`` may alias the
    prior state but not ``q_pred``/``P_pred``.
    """
    if not cholesky_into(Pzz, L6):
        return INNOVATION_DEGENERATE
    cho_solve_t_into(L6, Pqz, Kt)
    for r in range(4):
        acc = q_pred[r]
        for c in range(6):
            acc += Kt[c, r] * (z[c] - zhat[c])
        tmp4[r] = acc
    matmul_into(Pqz, Kt, work4)
    for r in range(4):
        for c in range(4):
            P_out[r, c] = P_pred[r, c] - work4[r, c]
    symmetrize(P_out)
    if not normalize_into(tmp4, q_out):
        return STATE_DEGENERATE
    return OK


@njit(cache=True, inline="always")
def cubature_update_core(
    q_pred, P_pred, points, z, R, m_n, m_d, redraw, S, work4, tmp4, upoints, Z, zhat, Pzz, Pqz, L6, Kt, q_out, P_out
):
    """Shared CKF/KCKF measurement update.

    With ``redraw`` the points are regenerated from chol(P_pred) into
    ``upoints``; otherwise the propagated prediction ``points`` are used.
    ``S`` and ``work4`` are scratch.
    """
    pts = points
    if redraw:
        if not cholesky_jitter_into(P_pred, S, work4):
            return COVARIANCE_DEGENERATE
        redraw_points_into(S, q_pred, upoints)
        pts = upoints
    n_pts = pts.shape[0]
    for i in range(n_pts):
        observe_into(pts[i], m_n, m_d, Z[i])
    inv = 1.0 / n_pts
    for c in range(6):
        acc = Z[0, c]
        for i in range(1, n_pts):
            acc += Z[i, c]
        zhat[c] = acc * inv
    for r in range(6):
        for c in range(r, 6):
            acc = Z[0, r] * Z[0, c]
            for i in range(1, n_pts):
                acc += Z[i, r] * Z[i, c]
            v = acc * inv - zhat[r] * zhat[c] + R[r, c]
            Pzz[r, c] = v
            Pzz[c, r] = v
    for r in range(4):
        for c in range(6):
            acc = pts[0, r] * Z[0, c]
            for i in range(1, n_pts):
                acc += pts[i, r] * Z[i, c]
            Pqz[r, c] = acc * inv - q_pred[r] * zhat[c]
    return gain_update_core(q_pred, P_pred, z, zhat, Pzz, Pqz, L6, Kt, tmp4, work4, q_out, P_out)


@njit(cache=True, inline="always")
def predict_only_finish(q_pred, P_pred, q_out, P_out):
    for r in range(4):
        for c in range(4):
            P_out[r, c] = P_pred[r, c]
    symmetrize(P_out)
    if not normalize_into(q_pred, q_out):
        return STATE_DEGENERATE
    return OK


# --- whole-dataset loop ------------------------------------------------------


@njit(cache=True, inline="always")
def store_state(k, q, P, out_q, out_P, store_cov):
    for r in range(4):
        out_q[k, r] = q[r]
    if store_cov:
        for r in range(4):
            for c in range(4):
                out_P[k, r, c] = P[r, c]


@njit(cache=True)
def run_cubature(use_kckf, redraw, q0, P0, dt, gyro, acc, mag, valid, gyro_var, R, out_q, out_P, store_cov):
    """Filter a preprocessed dataset; returns ``(status, samples processed)``.

    Q_k is evaluated at the prior mean. All scratch is allocated once
    before the loop.
    """
    E = CUBATURE_DIRECTIONS
    q = q0.copy()
    P = P0.copy()
    F = np.empty((4, 4))
    G = np.empty((4, 3))
    Q = np.empty((4, 4))
    S = np.empty((4, 4))
    M = np.empty((4, 4))
    work4 = np.empty((4, 4))
    tmp4 = np.empty(4)
    sigma = np.empty((8, 4))
    points = np.empty((8, 4))
    Z = np.empty((8, 6))
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
        if use_kckf:
            kckf_predict_core(F, S, q, Q, E, tmp4, M, points, q_pred, P_pred)
        else:
            ckf_predict_core(F, S, q, Q, E, 4.0, tmp4, sigma, points, q_pred, P_pred)
        if valid[k]:
            m_n, m_d = load_measurement_into(acc, mag, k, z)
            status = cubature_update_core(
                q_pred, P_pred, points, z, R, m_n, m_d, redraw,
                S, work4, tmp4, sigma, Z, zhat, Pzz, Pqz, L6, Kt, q, P,
            )
        else:
            status = predict_only_finish(q_pred, P_pred, q, P)
        if status != OK:
            return status, k
        store_state(k, q, P, out_q, out_P, store_cov)
    return OK, dt.shape[0]


# --- public API ------------------------------------------------------------


def raise_for_status(status: int, where: str = "") -> None:
    suffix = f" ({where})" if where else ""
    if status == OK:
        return
    if status == COVARIANCE_DEGENERATE:
        raise CovarianceDegenerateError("covariance is not positive definite" + suffix)
    if status == INNOVATION_DEGENERATE:
        raise InnovationDegenerateError("innovation covariance is not positive definite" + suffix)
    if status == STATE_DEGENERATE:
        raise DegenerateStateError("quaternion estimate collapsed to zero norm" + suffix)
    raise RuntimeError(f"unknown filter status {status}")


def _as_square(P: npt.ArrayLike, n: int, name: str) -> Matrix:
    arr = np.ascontiguousarray(P, dtype=np.float64)
    if arr.shape != (n, n) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be a finite {n}x{n} matrix")
    scale = max(float(np.max(np.abs(arr))), np.finfo(float).tiny)
    if np.max(np.abs(arr - arr.T)) > 1e-9 * scale:
        raise InvalidArgumentError(f"{name} must be symmetric")
    return arr


def cholesky_sqrt(P: npt.ArrayLike) -> Matrix:
    """Lower-triangular ``S`` with ``S S^T = P``.

    One retry with ``1e-12 * trace(P) / 4`` added to the diagonal is made
    before giving up with :class:`CovarianceDegenerateError`.
    """
    P = _as_square(P, 4, "P")
    S = np.zeros((4, 4))
    if not cholesky_jitter_into(P, S, np.empty((4, 4))):
        raise CovarianceDegenerateError("covariance is not positive definite")
    return S


def _prepare(state: FilterState, omega, dt: float, Q) -> tuple:
    wx, wy, wz = as_rate(omega)
    dt = check_dt(dt)
    Q = _as_square(Q, 4, "Q")
    F = np.empty((4, 4))
    transition_into(wx, wy, wz, dt, F)
    S = cholesky_sqrt(state.P)
    return F, S, Q


def ckf_predict(state: FilterState, omega: npt.ArrayLike, dt: float, Q: npt.ArrayLike) -> Prediction:
    """Reference CKF prediction: draw, propagate, then average the points."""
    F, S, Q = _prepare(state, omega, dt, Q)
    sigma = np.empty((2 * NQ, NQ))
    points = np.empty((2 * NQ, NQ))
    q_pred = np.empty(NQ)
    P_pred = np.empty((NQ, NQ))
    ckf_predict_core(F, S, state.q, Q, CUBATURE_DIRECTIONS, float(NQ), np.empty(NQ), sigma, points, q_pred, P_pred)
    return Prediction(q_pred, P_pred, points)


def kckf_predict(state: FilterState, omega: npt.ArrayLike, dt: float, Q: npt.ArrayLike) -> Prediction:
    """Simplified prediction: ``M = F S``, ``q = F q``, points ``M e_i + q``, ``P = M M^T + Q``."""
    F, S, Q = _prepare(state, omega, dt, Q)
    M = np.empty((NQ, NQ))
    points = np.empty((2 * NQ, NQ))
    q_pred = np.empty(NQ)
    P_pred = np.empty((NQ, NQ))
    kckf_predict_core(F, S, state.q, Q, CUBATURE_DIRECTIONS, np.empty(NQ), M, points, q_pred, P_pred)
    return Prediction(q_pred, P_pred, points, M)


def cubature_update(
    pred: Prediction,
    z: npt.ArrayLike,
    R: npt.ArrayLike,
    ref: MagneticReference,
    mode: PointSource | str = PointSource.REDRAW,
) -> FilterState:
    """Measurement update shared by the CKF and the KCKF."""
    mode = PointSource(mode)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.shape != (6,) or not np.all(np.isfinite(z)):
        raise InvalidArgumentError("z must be a finite 6-vector")
    R = _as_square(R, 6, "R")
    q_out = np.empty(NQ)
    P_out = np.empty((NQ, NQ))
    status = cubature_update_core(
        np.ascontiguousarray(pred.q_pred, dtype=np.float64),
        np.ascontiguousarray(pred.P_pred, dtype=np.float64),
        np.ascontiguousarray(pred.points, dtype=np.float64),
        z,
        R,
        float(ref.m_n),
        float(ref.m_d),
        mode is PointSource.REDRAW,
        np.zeros((4, 4)),
        np.empty((4, 4)),
        np.empty(4),
        np.empty((8, 4)),
        np.empty((8, 6)),
        np.empty(6),
        np.empty((6, 6)),
        np.empty((4, 6)),
        np.zeros((6, 6)),
        np.empty((6, 4)),
        q_out,
        P_out,
    )
    raise_for_status(status, "cubature update")
    return FilterState(q_out, P_out)


def single_step_arrays(sample: ImuSample, dt: float) -> tuple:
    """``(dt, gyro, acc, mag, valid)`` as a length-one dataset."""
    rows = []
    for name, v in (("gyro", as_rate(sample.gyro)), ("acc", sample.acc), ("mag", sample.mag)):
        arr = np.ascontiguousarray(v, dtype=np.float64)
        if arr.shape != (3,):
            raise InvalidArgumentError(f"{name} must be a 3-vector")
        rows.append(arr.reshape(1, 3))
    return (np.array([check_dt(dt)]), *rows, np.array([bool(sample.valid)]))


def _cubature_step(
    use_kckf: bool,
    state: FilterState,
    sample: ImuSample,
    noise: NoiseParams,
    dt: float,
    mode: PointSource | str,
) -> FilterState:
    redraw = PointSource(mode) is PointSource.REDRAW
    out_q = np.empty((1, NQ))
    out_P = np.empty((1, NQ, NQ))
    status, _ = run_cubature(
        use_kckf, redraw, state.q, state.P, *single_step_arrays(sample, dt),
        float(noise.gyro_var), measurement_noise_cov(noise), out_q, out_P, True,
    )
    raise_for_status(status, "kckf step" if use_kckf else "ckf step")
    return FilterState(out_q[0], out_P[0])


def kckf_step(
    state: FilterState,
    sample: ImuSample,
    noise: NoiseParams,
    dt: float,
    mode: PointSource | str = PointSource.REDRAW,
) -> FilterState:
    """One KCKF cycle: Q_k at the prior mean, simplified prediction, cubature update.

    ``sample`` must already be preprocessed (unit acc/mag). An invalid
    sample yields a prediction-only step.
    """
    return _cubature_step(True, state, sample, noise, dt, mode)


def ckf_step(
    state: FilterState,
    sample: ImuSample,
    noise: NoiseParams,
    dt: float,
    mode: PointSource | str = PointSource.REDRAW,
) -> FilterState:
    """As :func:`kckf_step` but with the literal CKF prediction."""
    return _cubature_step(False, state, sample, noise, dt, mode)
