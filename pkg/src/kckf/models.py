"""Process/observation models shared by every filter, and MARG preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Iterator, NamedTuple

import numpy as np
import numpy.typing as npt
from numba import njit

from .errors import InvalidArgumentError
from .quaternion import (
    UNIT_TOLERANCE,
    Matrix,
    Vector,
    as_quaternion,
    as_rate,
    check_dt,
    check_unit,
    dcm,
    transition_matrix,
)

#: reference gravity direction in the global frame (z up, unit length)
GRAVITY_REF = np.array([0.0, 0.0, 1.0])


class MagneticReference(NamedTuple):
    """Global-frame magnetic reference ``(m_N, 0, m_D)``."""

    m_n: float
    m_d: float

    @property
    def vector(self) -> Vector:
        return np.array([self.m_n, 0.0, self.m_d])


@dataclass(frozen=True)
class NoiseParams:
    """Variances driving Q_k (gyro) and R_k (accelerometer, magnetometer)."""

    gyro_var: float = 1.0e-3
    acc_var: float = 1.0e-2
    mag_var: float = 1.0e-2

    def __post_init__(self) -> None:
        for name in ("gyro_var", "acc_var", "mag_var"):
            value = getattr(self, name)
            if not (value >= 0.0) or not np.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class LowPassConfig:
    """First-order smoothing ``y_k = alpha x_k + (1 - alpha) y_{k-1}``.

    ``alpha = 1`` disables filtering. The default is roughly a 3.5 Hz
    cutoff at 100 Hz.
    """

    alpha: float = 0.2

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidArgumentError(f"low-pass alpha must lie in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class ImuSample:
    t: float
    gyro: Vector
    acc: Vector
    mag: Vector
    valid: bool = True


@dataclass
class ImuData:
    """A time-ordered stream of nine-axis samples stored column-wise.

    ``gyro`` is rad/s. ``acc`` and ``mag`` are raw sensor units before
    :func:`preprocess` and unit vectors after it. ``valid`` marks samples
    whose acc/mag may be used for a measurement update.
    """

    t: npt.NDArray[np.float64]
    gyro: npt.NDArray[np.float64]
    acc: npt.NDArray[np.float64]
    mag: npt.NDArray[np.float64]
    valid: npt.NDArray[np.bool_] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.t = np.ascontiguousarray(self.t, dtype=np.float64)
        n = self.t.shape[0]
        for name in ("gyro", "acc", "mag"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (n, 3):
                raise InvalidArgumentError(f"{name} must have shape ({n}, 3), got {arr.shape}")
            setattr(self, name, arr)
        if self.valid is None:
            self.valid = np.ones(n, dtype=np.bool_)
        else:
            self.valid = np.ascontiguousarray(self.valid, dtype=np.bool_)
            if self.valid.shape != (n,):
                raise InvalidArgumentError("valid must have one flag per sample")

    def __len__(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, k: int) -> ImuSample:
        return ImuSample(
            float(self.t[k]), self.gyro[k].copy(), self.acc[k].copy(), self.mag[k].copy(), bool(self.valid[k])
        )

    def __iter__(self) -> Iterator[ImuSample]:
        for k in range(len(self)):
            yield self[k]

    def periods(self, nominal_dt: float) -> npt.NDArray[np.float64]:
        """Per-sample sampling period; the first sample uses ``nominal_dt``."""
        dt = np.empty_like(self.t)
        if len(dt):
            dt[0] = nominal_dt
            dt[1:] = np.diff(self.t)
        return dt


# --- kernels ---------------------------------------------------------------


@njit(cache=True)
def reference_from_dip(m_d):
    """(m_N, m_D) with m_D clamped to [-1, 1] and m_N the nonnegative root."""
    if m_d > 1.0:
        m_d = 1.0
    elif m_d < -1.0:
        m_d = -1.0
    return sqrt(max(0.0, 1.0 - m_d * m_d)), m_d


@njit(cache=True)
def magnetic_reference_terms(acc, mag):
    """(m_N, m_D) from unit acc/mag."""
    return reference_from_dip(acc[0] * mag[0] + acc[1] * mag[1] + acc[2] * mag[2])


@njit(cache=True)
def load_measurement_into(acc, mag, k, z):
    """z = [acc[k], mag[k]]; returns the reference terms of that sample."""
    for i in range(3):
        z[i] = acc[k, i]
        z[3 + i] = mag[k, i]
    return reference_from_dip(z[0] * z[3] + z[1] * z[4] + z[2] * z[5])


@njit(cache=True)
def observe_into(q, m_n, m_d, out):
    q0, q1, q2, q3 = q[0], q[1], q[2], q[3]
    c02 = 2.0 * (q1 * q3 - q0 * q2)
    c12 = 2.0 * (q2 * q3 + q0 * q1)
    c22 = q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3
    out[0] = c02
    out[1] = c12
    out[2] = c22
    out[3] = (q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3) * m_n + c02 * m_d
    out[4] = 2.0 * (q1 * q2 - q0 * q3) * m_n + c12 * m_d
    out[5] = 2.0 * (q1 * q3 + q0 * q2) * m_n + c22 * m_d


@njit(cache=True)
def observation_jacobian_into(q, m_n, m_d, H):
    """Analytic d h / d q (6x4) of :func:`observe_into`."""
    q0, q1, q2, q3 = 2.0 * q[0], 2.0 * q[1], 2.0 * q[2], 2.0 * q[3]
    H[0, 0] = -q2
    H[0, 1] = q3
    H[0, 2] = -q0
    H[0, 3] = q1
    H[1, 0] = q1
    H[1, 1] = q0
    H[1, 2] = q3
    H[1, 3] = q2
    H[2, 0] = q0
    H[2, 1] = -q1
    H[2, 2] = -q2
    H[2, 3] = q3
    H[3, 0] = q0 * m_n - q2 * m_d
    H[3, 1] = q1 * m_n + q3 * m_d
    H[3, 2] = -q2 * m_n - q0 * m_d
    H[3, 3] = -q3 * m_n + q1 * m_d
    H[4, 0] = -q3 * m_n + q1 * m_d
    H[4, 1] = q2 * m_n + q0 * m_d
    H[4, 2] = q1 * m_n + q3 * m_d
    H[4, 3] = -q0 * m_n + q2 * m_d
    H[5, 0] = q2 * m_n + q0 * m_d
    H[5, 1] = q3 * m_n - q1 * m_d
    H[5, 2] = q0 * m_n - q2 * m_d
    H[5, 3] = q1 * m_n + q3 * m_d


@njit(cache=True)
def _lowpass_normalize(raw_acc, raw_mag, alpha, acc, mag, valid):
    n = raw_acc.shape[0]
    ya = np.zeros(3)
    ym = np.zeros(3)
    primed_a = False
    primed_m = False
    for k in range(n):
        ok = True
        # a non-finite or zero raw vector leaves the filter state untouched
        na = sqrt(raw_acc[k, 0] ** 2 + raw_acc[k, 1] ** 2 + raw_acc[k, 2] ** 2)
        if np.isfinite(na) and na > 0.0:
            for i in range(3):
                ya[i] = raw_acc[k, i] if not primed_a else alpha * raw_acc[k, i] + (1.0 - alpha) * ya[i]
            primed_a = True
        else:
            ok = False
        nm = sqrt(raw_mag[k, 0] ** 2 + raw_mag[k, 1] ** 2 + raw_mag[k, 2] ** 2)
        if np.isfinite(nm) and nm > 0.0:
            for i in range(3):
                ym[i] = raw_mag[k, i] if not primed_m else alpha * raw_mag[k, i] + (1.0 - alpha) * ym[i]
            primed_m = True
        else:
            ok = False

        fa = sqrt(ya[0] ** 2 + ya[1] ** 2 + ya[2] ** 2)
        fm = sqrt(ym[0] ** 2 + ym[1] ** 2 + ym[2] ** 2)
        if ok and fa > 1e-12 and fm > 1e-12:
            for i in range(3):
                acc[k, i] = ya[i] / fa
                mag[k, i] = ym[i] / fm
            valid[k] = True
        else:
            for i in range(3):
                acc[k, i] = 0.0
                mag[k, i] = 0.0
            valid[k] = False


# --- public API ------------------------------------------------------------


def state_transition(q: npt.ArrayLike, omega: npt.ArrayLike, dt: float) -> Vector:
    """Noise-free propagation ``F(w, dt) @ q``; linear in q, not renormalized."""
    return transition_matrix(omega, dt) @ as_quaternion(q)


def _as_unit3(v: npt.ArrayLike, name: str) -> Vector:
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be a finite 3-vector")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise InvalidArgumentError(f"{name} must be unit length, got norm {norm!r}")
    return arr


def magnetic_reference(acc: npt.ArrayLike, mag: npt.ArrayLike) -> MagneticReference:
    """Horizontal/vertical split of the magnetic field from unit acc and mag.

    ``m_D`` is the dip component (acc . mag), and ``m_N`` the non-negative
    horizontal part ``sqrt(max(0, 1 - m_D^2))``.
    """
    m_n, m_d = magnetic_reference_terms(_as_unit3(acc, "acc"), _as_unit3(mag, "mag"))
    return MagneticReference(m_n, m_d)


def observe(q: npt.ArrayLike, ref: MagneticReference) -> Vector:
    """Predicted normalized [acc; mag] in the sensor frame for attitude ``q``."""
    q = as_quaternion(q)
    check_unit(q)
    out = np.empty(6)
    observe_into(q, float(ref.m_n), float(ref.m_d), out)
    return out


def observe_block(q: npt.ArrayLike, ref: MagneticReference) -> Vector:
    """Same quantity as :func:`observe`, via blockdiag(C, C) @ [a_ref; m_ref]."""
    C = dcm(q)
    block = np.zeros((6, 6))
    block[:3, :3] = C
    block[3:, 3:] = C
    return block @ np.concatenate([GRAVITY_REF, ref.vector])


def observation_jacobian(q: npt.ArrayLike, ref: MagneticReference) -> Matrix:
    H = np.empty((6, 4))
    observation_jacobian_into(as_quaternion(q), float(ref.m_n), float(ref.m_d), H)
    return H


def measurement_noise_cov(p: NoiseParams) -> Matrix:
    """blockdiag(acc_var I3, mag_var I3)."""
    if not (p.acc_var >= 0.0 and p.mag_var >= 0.0):
        raise InvalidArgumentError("measurement variances must be >= 0")
    return np.diag([p.acc_var] * 3 + [p.mag_var] * 3).astype(np.float64)


def preprocess(raw: ImuData, lpf: LowPassConfig | None = None) -> ImuData:
    """Low-pass filter then normalize acc and mag; gyro passes through.

    Samples whose acc or mag is non-finite or zero (raw or filtered) are
    flagged ``valid=False`` with zeroed acc/mag; filters run a
    prediction-only step for them.
    """
    lpf = lpf or LowPassConfig()
    n = len(raw)
    acc = np.empty((n, 3))
    mag = np.empty((n, 3))
    valid = np.empty(n, dtype=np.bool_)
    _lowpass_normalize(raw.acc, raw.mag, float(lpf.alpha), acc, mag, valid)
    valid &= raw.valid
    return ImuData(raw.t.copy(), raw.gyro.copy(), acc, mag, valid)


__all__ = [
    "GRAVITY_REF",
    "ImuData",
    "ImuSample",
    "LowPassConfig",
    "MagneticReference",
    "NoiseParams",
    "magnetic_reference",
    "measurement_noise_cov",
    "observation_jacobian",
    "observe",
    "observe_block",
    "preprocess",
    "state_transition",
]
