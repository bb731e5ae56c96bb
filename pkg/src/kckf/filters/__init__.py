"""Quaternion attitude filters: KCKF, CKF, UKF, EKF and a gyro-only baseline."""

from .cubature import (
    CUBATURE_DIRECTIONS,
    cholesky_sqrt,
    ckf_predict,
    ckf_step,
    cubature_directions,
    cubature_update,
    kckf_predict,
    kckf_step,
)
from .ekf import ekf_predict, ekf_step, gyro_only_step
from .runner import (
    EXTENSION_SLOTS,
    FILTERS,
    FilterRun,
    FilterSettings,
    check_filter_name,
    make_runner,
    run_filter,
)
from .state import NQ, FilterState, PointSource, Prediction, UkfWeights
from .ukf import ukf_predict, ukf_step, ukf_weights

__all__ = [
    "CUBATURE_DIRECTIONS",
    "EXTENSION_SLOTS",
    "FILTERS",
    "NQ",
    "FilterRun",
    "FilterSettings",
    "FilterState",
    "PointSource",
    "Prediction",
    "UkfWeights",
    "check_filter_name",
    "cholesky_sqrt",
    "ckf_predict",
    "ckf_step",
    "cubature_directions",
    "cubature_update",
    "ekf_predict",
    "ekf_step",
    "gyro_only_step",
    "kckf_predict",
    "kckf_step",
    "make_runner",
    "run_filter",
    "ukf_predict",
    "ukf_step",
    "ukf_weights",
]
