"""Synthetic ground-truth trajectories and noisy nine-axis measurements.

Truth is integrated with the same discrete kinematics the filters use,
``q_k = normalize(F(w_k, dt) q_{k-1})``, so with zero noise the filters
see a perfectly consistent process. The gyro sample ``w_k`` is the rate
over the interval ending at ``t_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import pi, radians, sqrt

import numpy as np
import numpy.typing as npt
from numba import njit

from .errors import InvalidArgumentError
from .models import ImuData
from .quaternion import Vector, as_quaternion, dcm_into, normalize_into, quats_to_euler, transition_into


class ProfileKind(str, Enum):
    STATIONARY = "stationary"
    CONSTANT_RATE = "constant-rate"
    WALK_LIKE = "walk-like"


@dataclass(frozen=True)
class TrajectoryProfile:
    """Angular-rate profile sampled on the grid ``t_k = k / rate``.

    Parameters
    ----------
    kind : ProfileKind
        ``stationary`` holds the attitude; ``constant-rate`` spins at
        ``omega``; ``walk-like`` superimposes a gait-frequency sway on roll
        and pitch with a slowly turning heading.
    duration : float
        Seconds; the trajectory has ``round(duration * rate) + 1`` samples.
    rate : float
        Sampling rate in Hz.
    omega : array_like
        Body rate in rad/s for ``constant-rate``.
    step_hz : float
        Gait frequency for ``walk-like``.
    sway : float
        Peak roll/pitch rate (rad/s) for ``walk-like``.
    turn_rate : float
        Mean heading rate (rad/s) for ``walk-like``.
    turn_period : float
        Period (s) of the heading-rate oscillation for ``walk-like``.
    q0 : array_like
        Initial attitude.
    """

    kind: ProfileKind = ProfileKind.STATIONARY
    duration: float = 10.0
    rate: float = 100.0
    omega: tuple[float, float, float] = (0.0, 0.0, 0.1)
    step_hz: float = 1.8
    sway: float = 0.6
    turn_rate: float = 0.05
    turn_period: float = 40.0
    q0: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if not (np.isfinite(self.rate) and self.rate > 0.0):
            raise InvalidArgumentError("rate must be positive")
        if not (np.isfinite(self.duration) and self.duration > 0.0):
            raise InvalidArgumentError("duration must be positive")
        if not np.all(np.isfinite(self.omega)):
            raise InvalidArgumentError("omega must be finite")
        as_quaternion(self.q0, "q0")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.rate)) + 1

    def rates(self, t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """True body rate (rad/s) at each time in ``t``."""
        w = np.zeros((t.shape[0], 3))
        if self.kind is ProfileKind.CONSTANT_RATE:
            w[:] = np.asarray(self.omega, dtype=np.float64)
        elif self.kind is ProfileKind.WALK_LIKE:
            ph = 2.0 * pi * self.step_hz * t
            w[:, 0] = self.sway * np.sin(ph)
            w[:, 1] = 0.7 * self.sway * np.sin(2.0 * ph + 0.5)
            w[:, 2] = self.turn_rate + 2.0 * self.turn_rate * np.sin(2.0 * pi * t / self.turn_period)
        return w


@dataclass(frozen=True)
class Trajectory:
    t: npt.NDArray[np.float64]
    q: npt.NDArray[np.float64]
    omega: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return self.t.shape[0]

    def euler(self) -> npt.NDArray[np.float64]:
        """Roll, pitch, yaw in degrees, one row per sample."""
        return quats_to_euler(self.q)


@dataclass(frozen=True)
class SensorNoiseModel:
    """Per-sample white-noise standard deviations plus a constant gyro bias.

    ``acc_std`` is in units of g and ``mag_std`` in units of the field
    magnitude, matching the unit reference vectors.
    """

    gyro_std: float = 0.0
    acc_std: float = 0.0
    mag_std: float = 0.0
    gyro_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        for name in ("gyro_std", "acc_std", "mag_std"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise InvalidArgumentError(f"{name} must be finite and >= 0")
        if len(self.gyro_bias) != 3 or not np.all(np.isfinite(self.gyro_bias)):
            raise InvalidArgumentError("gyro_bias must be a finite 3-vector")

    @classmethod
    def from_densities(
        cls,
        rate: float = 100.0,
        gyro_density_dps: float = 0.01,
        acc_density_ug: float = 200.0,
        mag_density_mgauss: float = 0.2,
        field_mgauss: float = 500.0,
        gyro_bias: tuple[float, float, float] = (0.002, -0.003, 0.004),
    ) -> "SensorNoiseModel":
        """Convert noise densities to per-sample std over the Nyquist band.

        ``std = density * sqrt(rate / 2)``. The default densities are those
        of the MTW2-3A7G6 sensor; the field strength used to normalize the
        magnetometer and the gyro bias are conventions of this simulator.
        """
        if rate <= 0.0 or field_mgauss <= 0.0:
            raise InvalidArgumentError("rate and field strength must be positive")
        band = sqrt(rate / 2.0)
        return cls(
            gyro_std=radians(gyro_density_dps) * band,
            acc_std=acc_density_ug * 1e-6 * band,
            mag_std=mag_density_mgauss * band / field_mgauss,
            gyro_bias=tuple(float(b) for b in gyro_bias),
        )


#: per-sample noise at 100 Hz derived from the MTW2-3A7G6 densities
DEFAULT_NOISE = SensorNoiseModel.from_densities()

#: default magnetic dip in degrees
DEFAULT_DIP = 50.0


@njit(cache=True)
def _integrate(q0, omega, dt, out):
    F = np.empty((4, 4))
    tmp = np.empty(4)
    for r in range(4):
        out[0, r] = q0[r]
    for k in range(1, omega.shape[0]):
        transition_into(omega[k, 0], omega[k, 1], omega[k, 2], dt, F)
        for r in range(4):
            acc = 0.0
            for c in range(4):
                acc += F[r, c] * out[k - 1, c]
            tmp[r] = acc
        normalize_into(tmp, out[k])


def generate_trajectory(profile: TrajectoryProfile) -> Trajectory:
    """Sample the profile's rates and integrate the true attitude.

    ``q[0]`` is ``profile.q0`` normalized; each later sample applies one
    step of the discrete kinematics with that sample's rate.
    """
    n = profile.n_samples
    t = np.arange(n, dtype=np.float64) / profile.rate
    omega = profile.rates(t)
    q = np.empty((n, 4))
    q0 = as_quaternion(profile.q0, "q0")
    _integrate(q0 / np.linalg.norm(q0), omega, 1.0 / profile.rate, q)
    return Trajectory(t, q, omega)


def mag_reference(dip_deg: float) -> Vector:
    """Global-frame unit field ``(cos dip, 0, sin dip)`` (north, east, down-positive)."""
    d = radians(dip_deg)
    return np.array([np.cos(d), 0.0, np.sin(d)])


@njit(cache=True)
def _rotate_refs(q, m_ref, acc, mag):
    C = np.empty((3, 3))
    for k in range(q.shape[0]):
        dcm_into(q[k], C)
        for r in range(3):
            acc[k, r] = C[r, 2]
            mag[k, r] = C[r, 0] * m_ref[0] + C[r, 1] * m_ref[1] + C[r, 2] * m_ref[2]


def synthesize_measurements(
    truth: Trajectory,
    noise: SensorNoiseModel | None = None,
    ref_mag_dip: float = DEFAULT_DIP,
    seed: int | None = 0,
) -> ImuData:
    """Noisy gyro, accelerometer and magnetometer samples along ``truth``.

    ``acc = C(q) (0, 0, 1) + v_acc`` and ``mag = C(q) m_ref + v_mag`` are
    left unnormalized; :func:`kckf.models.preprocess` normalizes them.
    Draws come from ``numpy.random.default_rng(seed)`` in the fixed order
    gyro, acc, mag, so a given seed always yields the same data.
    """
    noise = noise or SensorNoiseModel()
    n = len(truth)
    acc = np.empty((n, 3))
    mag = np.empty((n, 3))
    _rotate_refs(truth.q, mag_reference(ref_mag_dip), acc, mag)
    rng = np.random.default_rng(seed)
    gyro = truth.omega + np.asarray(noise.gyro_bias) + noise.gyro_std * rng.standard_normal((n, 3))
    acc += noise.acc_std * rng.standard_normal((n, 3))
    mag += noise.mag_std * rng.standard_normal((n, 3))
    return ImuData(truth.t.copy(), gyro, acc, mag)


def inject_acceleration_bursts(
    data: ImuData,
    n_bursts: int = 5,
    duration: float = 0.5,
    magnitude: float = 0.5,
    seed: int | None = 0,
) -> ImuData:
    """Add external-acceleration bursts to the accelerometer channel.

    A stress scenario outside the baseline gravity-only observation model:
    each burst adds a constant random-direction acceleration of
    ``magnitude`` g for ``duration`` seconds at a random start time.
    """
    if n_bursts < 0 or duration <= 0.0 or magnitude < 0.0:
        raise InvalidArgumentError("invalid burst parameters")
    acc = data.acc.copy()
    rng = np.random.default_rng(seed)
    t = data.t
    for _ in range(n_bursts):
        start = rng.uniform(t[0], t[-1])
        d = rng.standard_normal(3)
        d *= magnitude / np.linalg.norm(d)
        acc[(t >= start) & (t < start + duration)] += d
    return ImuData(t.copy(), data.gyro.copy(), acc, data.mag.copy(), data.valid.copy())


@dataclass(frozen=True)
class Scenario:
    """A profile plus noise settings; :meth:`build` returns truth and raw data."""

    profile: TrajectoryProfile = field(default_factory=TrajectoryProfile)
    noise: SensorNoiseModel = field(default_factory=lambda: DEFAULT_NOISE)
    dip: float = DEFAULT_DIP
    seed: int | None = 0

    def build(self) -> tuple[Trajectory, ImuData]:
        truth = generate_trajectory(self.profile)
        return truth, synthesize_measurements(truth, self.noise, self.dip, self.seed)


__all__ = [
    "DEFAULT_DIP",
    "DEFAULT_NOISE",
    "ProfileKind",
    "Scenario",
    "SensorNoiseModel",
    "Trajectory",
    "TrajectoryProfile",
    "generate_trajectory",
    "inject_acceleration_bursts",
    "mag_reference",
    "synthesize_measurements",
]
