"""Quaternion attitude estimation from nine-axis MARG data.

The cubature Kalman filter is provided in two numerically equivalent forms:
the literal point-propagation route (``ckf``) and a reduced-cost route that
propagates the covariance square root directly (``kckf``). UKF, EKF and a
gyro-only integrator are included for comparison.
"""

from __future__ import annotations

from .config import RunConfig
from .errors import (
    CovarianceDegenerateError,
    DatasetError,
    DegenerateStateError,
    InnovationDegenerateError,
    InvalidArgumentError,
    KckfError,
)
from .evaluation import (
    benchmark,
    benchmark_many,
    equivalence_check,
    rmse_euler,
    rmse_quaternions,
)
from .filters import (
    FILTERS,
    FilterSettings,
    FilterState,
    PointSource,
    ckf_predict,
    ckf_step,
    ekf_step,
    gyro_only_step,
    kckf_predict,
    kckf_step,
    run_filter,
    ukf_step,
)
from .flops import ckf_prediction_flops, kckf_prediction_flops
from .io import parse_dataset, read_attitude, write_attitude, write_dataset
from .models import ImuData, ImuSample, NoiseParams, preprocess
from .sim import Scenario, SensorNoiseModel, TrajectoryProfile, generate_trajectory, synthesize_measurements

__version__ = "0.1.0"

__all__ = [
    "FILTERS",
    "CovarianceDegenerateError",
    "DatasetError",
    "DegenerateStateError",
    "FilterSettings",
    "FilterState",
    "ImuData",
    "ImuSample",
    "InnovationDegenerateError",
    "InvalidArgumentError",
    "KckfError",
    "NoiseParams",
    "PointSource",
    "RunConfig",
    "Scenario",
    "SensorNoiseModel",
    "TrajectoryProfile",
    "benchmark",
    "benchmark_many",
    "ckf_predict",
    "ckf_prediction_flops",
    "ckf_step",
    "ekf_step",
    "equivalence_check",
    "generate_trajectory",
    "gyro_only_step",
    "kckf_predict",
    "kckf_prediction_flops",
    "kckf_step",
    "parse_dataset",
    "preprocess",
    "read_attitude",
    "rmse_euler",
    "rmse_quaternions",
    "run_filter",
    "synthesize_measurements",
    "ukf_step",
    "write_attitude",
    "write_dataset",
]
