"""Quaternion algebra and attitude kinematics.

Conventions
-----------
* Quaternions are scalar-first ``[q0, q1, q2, q3]`` float64 arrays.
* ``dcm(q)`` maps global-frame vectors into the sensor frame.
* Euler angles are intrinsic ZYX (yaw, then pitch, then roll), in degrees.

The ``*_into`` kernels are numba-compiled and write into caller-owned
buffers; the filters call them directly. The public functions validate
their inputs and allocate.
"""

from __future__ import annotations

from math import sqrt
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from numba import njit

from .errors import DegenerateStateError, InvalidArgumentError

Vector = npt.NDArray[np.float64]
Matrix = npt.NDArray[np.float64]

#: norm below which a quaternion cannot be normalized
MIN_NORM = 1e-12
#: tolerated drift of a "unit" quaternion before dcm/observe refuse it
UNIT_TOLERANCE = 1e-6


class EulerAngles(NamedTuple):
    roll: float
    pitch: float
    yaw: float


@njit(cache=True)
def omega_into(wx, wy, wz, out):
    out[0, 0] = 0.0
    out[0, 1] = -wx
    out[0, 2] = -wy
    out[0, 3] = -wz
    out[1, 0] = wx
    out[1, 1] = 0.0
    out[1, 2] = wz
    out[1, 3] = -wy
    out[2, 0] = wy
    out[2, 1] = -wz
    out[2, 2] = 0.0
    out[2, 3] = wx
    out[3, 0] = wz
    out[3, 1] = wy
    out[3, 2] = -wx
    out[3, 3] = 0.0


@njit(cache=True)
def transition_into(wx, wy, wz, dt, F):
    """F = I + dt/2 * Omega(w)."""
    h = 0.5 * dt
    omega_into(wx, wy, wz, F)
    for i in range(4):
        for j in range(4):
            F[i, j] = h * F[i, j]
        F[i, i] = 1.0 + F[i, i]


@njit(cache=True)
def noise_input_into(q, dt, G):
    # column 0 is the sign pattern that keeps G^T q = 0; columns 1 and 2
    # follow the usual layout
    h = 0.5 * dt
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    G[0, 0] = -h * q1
    G[0, 1] = h * q2
    G[0, 2] = h * q3
    G[1, 0] = h * q0
    G[1, 1] = h * q3
    G[1, 2] = -h * q2
    G[2, 0] = h * q3
    G[2, 1] = -h * q0
    G[2, 2] = h * q1
    G[3, 0] = -h * q2
    G[3, 1] = -h * q1
    G[3, 2] = -h * q0


@njit(cache=True)
def process_noise_into(q, dt, gyro_var, G, Q):
    """Q = G (gyro_var I3) G^T; ``G`` is scratch space of shape (4, 3)."""
    noise_input_into(q, dt, G)
    for i in range(4):
        for j in range(i, 4):
            acc = G[i, 0] * G[j, 0] + G[i, 1] * G[j, 1] + G[i, 2] * G[j, 2]
            acc = gyro_var * acc
            Q[i, j] = acc
            Q[j, i] = acc


@njit(cache=True)
def dcm_into(q, C):
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    C[0, 0] = q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3
    C[0, 1] = 2.0 * (q1 * q2 + q0 * q3)
    C[0, 2] = 2.0 * (q1 * q3 - q0 * q2)
    C[1, 0] = 2.0 * (q1 * q2 - q0 * q3)
    C[1, 1] = q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3
    C[1, 2] = 2.0 * (q2 * q3 + q0 * q1)
    C[2, 0] = 2.0 * (q1 * q3 + q0 * q2)
    C[2, 1] = 2.0 * (q2 * q3 - q0 * q1)
    C[2, 2] = q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3


@njit(cache=True)
def normalize_into(q, out):
    """Write q/|q| into ``out``; returns False for a near-zero norm."""
    n = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if not (n > 1e-12):
        return False
    for i in range(4):
        out[i] = q[i] / n
    return True


def as_quaternion(q: npt.ArrayLike, name: str = "q") -> Vector:
    arr = np.asarray(q, dtype=np.float64)
    if arr.shape != (4,):
        raise InvalidArgumentError(f"{name} must have shape (4,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite components")
    return arr


def as_rate(omega: npt.ArrayLike) -> Vector:
    arr = np.asarray(omega, dtype=np.float64)
    if arr.shape != (3,):
        raise InvalidArgumentError(f"angular rate must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("angular rate has non-finite components")
    return arr


def check_dt(dt: float) -> float:
    dt = float(dt)
    if not (dt > 0.0) or not np.isfinite(dt):
        raise InvalidArgumentError(f"sampling period must be positive and finite, got {dt}")
    return dt


def check_unit(q: Vector, name: str = "q") -> None:
    norm = float(np.linalg.norm(q))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise InvalidArgumentError(f"{name} must be a unit quaternion, |{name}| = {norm!r}")


def omega_matrix(omega: npt.ArrayLike) -> Matrix:
    """Skew-symmetric 4x4 rate matrix with ``q_dot = 0.5 * Omega(w) @ q``."""
    wx, wy, wz = as_rate(omega)
    out = np.empty((4, 4))
    omega_into(wx, wy, wz, out)
    return out


def transition_matrix(omega: npt.ArrayLike, dt: float) -> Matrix:
    """First-order quaternion transition ``I + dt/2 * Omega(w)``."""
    wx, wy, wz = as_rate(omega)
    F = np.empty((4, 4))
    transition_into(wx, wy, wz, check_dt(dt), F)
    return F


def noise_input_matrix(q: npt.ArrayLike, dt: float) -> Matrix:
    """Map from gyro noise (rad/s, 3-vector) to quaternion increment.

    Every column is a signed permutation of ``q`` scaled by ``dt/2``, and
    ``G.T @ q == 0``.
    """
    G = np.empty((4, 3))
    noise_input_into(as_quaternion(q), check_dt(dt), G)
    return G


def process_noise_cov(q: npt.ArrayLike, dt: float, gyro_var: float) -> Matrix:
    """Process noise covariance ``G (gyro_var I3) G^T``; rank <= 3, q in its null space."""
    gyro_var = float(gyro_var)
    if not (gyro_var >= 0.0):
        raise InvalidArgumentError(f"gyro variance must be >= 0, got {gyro_var}")
    Q = np.empty((4, 4))
    process_noise_into(as_quaternion(q), check_dt(dt), gyro_var, np.empty((4, 3)), Q)
    return Q


def dcm(q: npt.ArrayLike) -> Matrix:
    """Direction cosine matrix taking global-frame vectors to the sensor frame."""
    q = as_quaternion(q)
    check_unit(q)
    C = np.empty((3, 3))
    dcm_into(q, C)
    return C


def normalize(q: npt.ArrayLike) -> Vector:
    q = as_quaternion(q)
    out = np.empty(4)
    if not normalize_into(q, out):
        raise DegenerateStateError(f"cannot normalize quaternion with norm {np.linalg.norm(q)!r}")
    return out


def _wrap_half_open(deg: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    # atan2 may return exactly -180; the documented range is (-180, 180]
    return np.where(deg <= -180.0, deg + 360.0, deg)


def quats_to_euler(qs: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Vectorized ZYX decomposition of an (n, 4) array into (n, 3) degrees.

    Columns are roll, pitch, yaw. At gimbal lock roll is pinned to zero and
    yaw absorbs the combined rotation.
    """
    qs = np.asarray(qs, dtype=np.float64)
    if qs.ndim != 2 or qs.shape[1] != 4:
        raise InvalidArgumentError(f"expected an (n, 4) array, got {qs.shape}")
    q0, q1, q2, q3 = qs.T
    sin_pitch = np.clip(2.0 * (q0 * q2 - q1 * q3), -1.0, 1.0)
    locked = np.abs(sin_pitch) >= 1.0 - 1e-12

    roll = np.arctan2(2.0 * (q2 * q3 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3)
    pitch = np.arcsin(sin_pitch)
    yaw = np.arctan2(2.0 * (q1 * q2 + q0 * q3), q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3)

    if np.any(locked):
        # with roll = 0 the body-to-global matrix has R01 = -sin(yaw), R11 = cos(yaw)
        r01 = 2.0 * (q1 * q2 - q0 * q3)
        r11 = q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3
        roll = np.where(locked, 0.0, roll)
        pitch = np.where(locked, np.sign(sin_pitch) * (np.pi / 2.0), pitch)
        yaw = np.where(locked, np.arctan2(-r01, r11), yaw)

    out = np.degrees(np.stack([roll, pitch, yaw], axis=1))
    out[:, 0] = _wrap_half_open(out[:, 0])
    out[:, 2] = _wrap_half_open(out[:, 2])
    return out


def quat_to_euler(q: npt.ArrayLike) -> EulerAngles:
    roll, pitch, yaw = quats_to_euler(as_quaternion(q)[None, :])[0]
    return EulerAngles(float(roll), float(pitch), float(yaw))


def euler_to_quat(roll: float, pitch: float, yaw: float) -> Vector:
    """Inverse of :func:`quat_to_euler`; angles in degrees."""
    r, p, y = np.radians([roll, pitch, yaw]) / 2.0
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    return np.array(
        [
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        ]
    )
