"""Whole-dataset filter loops.

Each loop is compiled once and walks the preprocessed arrays without
returning to Python, so timing a run measures the per-measurement filter
step and nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import numpy.typing as npt

from ..errors import InvalidArgumentError
from ..models import ImuData, NoiseParams, measurement_noise_cov
from .cubature import raise_for_status, run_cubature
from .ekf import run_ekf, run_gyro
from .state import NQ, OK, FilterState, PointSource, UkfWeights
from .ukf import run_ukf, sigma_scale, ukf_weights

#: filters this package implements
FILTERS = ("kckf", "ckf", "ukf", "ekf", "gyro")

#: names reserved for filters that are deliberately not implemented
EXTENSION_SLOTS = {
    "kukf": "filter 'kukf' is not implemented: the simplified-UKF formulation is defined "
    "in external prior work and is left as an extension slot",
}


@dataclass(frozen=True)
class FilterSettings:
    noise: NoiseParams = field(default_factory=NoiseParams)
    mode: PointSource = PointSource.REDRAW
    ukf: UkfWeights = field(default_factory=ukf_weights)
    nominal_dt: float = 0.01
    initial: FilterState = field(default_factory=FilterState.initial)


@dataclass
class FilterRun:
    """Per-sample posterior estimates of one filter over one dataset.

    ``q`` holds one row per processed sample. When the loop stopped early,
    ``failed_at`` is the index of the sample that failed and the arrays
    are truncated to the samples before it.
    """

    name: str
    q: npt.NDArray[np.float64]
    P: npt.NDArray[np.float64] | None
    status: int = OK
    failed_at: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    def raise_for_status(self) -> None:
        raise_for_status(self.status, f"{self.name}, sample {self.failed_at}")


def check_filter_name(name: str) -> str:
    key = name.strip().lower()
    if key in EXTENSION_SLOTS:
        raise NotImplementedError(EXTENSION_SLOTS[key])
    if key not in FILTERS:
        raise InvalidArgumentError(f"unknown filter {name!r}; choose from {', '.join(FILTERS)}")
    return key


def make_runner(
    name: str,
    data: ImuData,
    settings: FilterSettings | None = None,
    store_cov: bool = False,
) -> Callable[[], FilterRun]:
    """Bind a filter to a preprocessed dataset and return a zero-argument runner.

    All argument preparation and output allocation happens here; each call
    of the returned function only executes the compiled loop (outputs are
    reused across calls).
    """
    name = check_filter_name(name)
    settings = settings or FilterSettings()
    n = len(data)
    if n == 0:
        raise InvalidArgumentError("dataset is empty")
    dt = data.periods(settings.nominal_dt)
    if not np.all(dt > 0.0):
        raise InvalidArgumentError("timestamps must be strictly increasing")
    q0 = np.ascontiguousarray(settings.initial.q)
    P0 = np.ascontiguousarray(settings.initial.P)
    R = measurement_noise_cov(settings.noise)
    gyro_var = float(settings.noise.gyro_var)
    out_q = np.empty((n, NQ))
    out_P = np.empty((n if store_cov else 1, NQ, NQ))
    args = (data.gyro, data.acc, data.mag, data.valid)

    if name in ("kckf", "ckf"):
        use_kckf = name == "kckf"
        redraw = PointSource(settings.mode) is PointSource.REDRAW

        def loop():
            return run_cubature(
                use_kckf, redraw, q0, P0, dt, *args, gyro_var, R, out_q, out_P, store_cov
            )

    elif name == "ukf":
        w = settings.ukf
        scale = sigma_scale(w)

        def loop():
            return run_ukf(q0, P0, dt, *args, gyro_var, R, scale, w.wc0, w.wi, out_q, out_P, store_cov)

    elif name == "ekf":

        def loop():
            return run_ekf(q0, P0, dt, *args, gyro_var, R, out_q, out_P, store_cov)

    else:

        def loop():
            return run_gyro(q0, P0, dt, data.gyro, out_q, out_P, store_cov)

    def run() -> FilterRun:
        status, k = loop()
        stop = int(k)
        return FilterRun(
            name=name,
            q=out_q[:stop],
            P=out_P[:stop] if store_cov else None,
            status=int(status),
            failed_at=None if status == OK else stop,
        )

    return run


def run_filter(
    name: str,
    data: ImuData,
    settings: FilterSettings | None = None,
    store_cov: bool = False,
) -> FilterRun:
    """Run one filter over a preprocessed dataset (fresh output arrays)."""
    result = make_runner(name, data, settings, store_cov)()
    return FilterRun(
        result.name,
        result.q.copy(),
        None if result.P is None else result.P.copy(),
        result.status,
        result.failed_at,
    )
