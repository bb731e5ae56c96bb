"""Accuracy, timing and equivalence evaluation.

Timing protocol
---------------
The dataset is preprocessed and bound to each filter's compiled loop
before any clock is read, so a timed call covers only the per-measurement
predict + update work. Filters are timed round-robin within every
repetition (the order rotates between passes) so slow drift of the host
hits all of them alike. A repetition's value is ``elapsed / n_samples``
for the fastest of its ``passes`` dataset passes; ``passes=1`` is a plain
single batch. Warm-up passes are run first and discarded, and the garbage
collector is paused while timing.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from .errors import InvalidArgumentError
from .filters.runner import FilterRun, FilterSettings, check_filter_name, make_runner, run_filter
from .filters.state import Prediction
from .models import ImuData
from .quaternion import quats_to_euler

ANGLES = ("roll", "pitch", "yaw")


# --- accuracy --------------------------------------------------------------


def angle_errors(est: npt.ArrayLike, ref: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Squared angle errors in deg^2 along the shorter way around the circle.

    For angles within one turn of each other this is the smallest of the
    errors against ``ref``, ``ref + 360`` and ``ref - 360``; reducing the
    difference modulo 360 first makes it hold for any representatives.
    """
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.shape != ref.shape:
        raise InvalidArgumentError(f"estimate shape {est.shape} != reference shape {ref.shape}")
    d = np.remainder(np.abs(est - ref), 360.0)
    d = np.minimum(d, 360.0 - d)
    return d * d


@dataclass(frozen=True)
class RmseReport:
    """Roll, pitch and yaw RMSE in degrees over ``n`` samples."""

    roll: float
    pitch: float
    yaw: float
    n: int

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.roll, self.pitch, self.yaw)

    def as_dict(self) -> dict:
        return {"roll": self.roll, "pitch": self.pitch, "yaw": self.yaw, "n": self.n}


def rmse_euler(est: npt.ArrayLike, ref: npt.ArrayLike) -> RmseReport:
    """Wrap-aware RMSE of ``(n, 3)`` Euler-angle sequences in degrees."""
    est = np.atleast_2d(np.asarray(est, dtype=np.float64))
    ref = np.atleast_2d(np.asarray(ref, dtype=np.float64))
    if est.shape != ref.shape:
        raise InvalidArgumentError(f"length mismatch: {est.shape} vs {ref.shape}")
    if est.ndim != 2 or est.shape[1] != 3 or est.shape[0] == 0:
        raise InvalidArgumentError("expected non-empty (n, 3) roll/pitch/yaw arrays")
    r = np.sqrt(angle_errors(est, ref).mean(axis=0))
    return RmseReport(float(r[0]), float(r[1]), float(r[2]), est.shape[0])


def rmse_quaternions(q_est: npt.ArrayLike, q_ref: npt.ArrayLike) -> RmseReport:
    return rmse_euler(quats_to_euler(q_est), quats_to_euler(q_ref))


@dataclass(frozen=True)
class AggregateRmse:
    """Mean and unbiased standard deviation of per-dataset RMSEs."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]
    n_datasets: int

    def as_dict(self) -> dict:
        return {
            "mean": dict(zip(ANGLES, self.mean)),
            "std": dict(zip(ANGLES, self.std)),
            "n_datasets": self.n_datasets,
        }


def aggregate(reports: Sequence[RmseReport]) -> AggregateRmse:
    if not reports:
        raise InvalidArgumentError("no reports to aggregate")
    arr = np.array([r.as_tuple() for r in reports])
    std = arr.std(axis=0, ddof=1) if len(reports) > 1 else np.full(3, np.nan)
    return AggregateRmse(tuple(arr.mean(axis=0)), tuple(std), len(reports))


# --- timing ----------------------------------------------------------------


@dataclass(frozen=True)
class TimingReport:
    """Per-measurement computation time of one filter.

    ``per_rep_ms`` holds one value per repetition; ``mean_ms`` and
    ``std_ms`` (unbiased) summarize them.
    """

    filter: str
    per_rep_ms: tuple[float, ...]
    n_samples: int
    passes: int = 1

    @property
    def repetitions(self) -> int:
        return len(self.per_rep_ms)

    @property
    def mean_ms(self) -> float:
        return float(np.mean(self.per_rep_ms))

    @property
    def std_ms(self) -> float:
        return float(np.std(self.per_rep_ms, ddof=1))

    def as_dict(self) -> dict:
        return {
            "filter": self.filter,
            "metric": "ms_per_measurement",
            "value": self.mean_ms,
            "std": self.std_ms,
            "n": self.repetitions,
            "samples": self.n_samples,
            "passes": self.passes,
        }


@dataclass(frozen=True)
class SpeedComparison:
    """``fast`` versus ``slow``: absolute gap, relative reduction and its significance."""

    fast: str
    slow: str
    gap_ms: float
    reduction: float
    pooled_std_ms: float

    @property
    def gap_in_std(self) -> float:
        return self.gap_ms / self.pooled_std_ms if self.pooled_std_ms > 0 else float("inf")


def compare_timing(fast: TimingReport, slow: TimingReport) -> SpeedComparison:
    pooled = float(np.sqrt(0.5 * (fast.std_ms**2 + slow.std_ms**2)))
    gap = slow.mean_ms - fast.mean_ms
    return SpeedComparison(fast.filter, slow.filter, gap, gap / slow.mean_ms, pooled)


def benchmark_many(
    filters: Iterable[str],
    data: ImuData,
    repetitions: int = 10,
    settings: FilterSettings | None = None,
    warmup: int = 1,
    passes: int = 1,
    clock=time.perf_counter,
) -> dict[str, TimingReport]:
    """Time several filters on one preprocessed dataset (see module notes)."""
    names = [check_filter_name(f) for f in filters]
    if not names:
        raise InvalidArgumentError("no filters to benchmark")
    if repetitions < 3:
        raise InvalidArgumentError("at least 3 repetitions are required")
    if warmup < 0 or passes < 1:
        raise InvalidArgumentError("warmup must be >= 0 and passes >= 1")
    n = len(data)
    if n == 0:
        raise InvalidArgumentError("dataset is empty")
    runners = {f: make_runner(f, data, settings) for f in names}
    for f in names:
        # first call compiles or loads the cached machine code
        runners[f]()
        for _ in range(warmup):
            runners[f]()

    per_rep: dict[str, list[float]] = {f: [] for f in names}
    enabled = gc.isenabled()
    gc.disable()
    try:
        turn = 0
        for _ in range(repetitions):
            best = dict.fromkeys(names, float("inf"))
            for _ in range(passes):
                k = turn % len(names)
                turn += 1
                for f in names[k:] + names[:k]:
                    run = runners[f]
                    t0 = clock()
                    run()
                    best[f] = min(best[f], clock() - t0)
            for f in names:
                per_rep[f].append(1e3 * best[f] / n)
    finally:
        if enabled:
            gc.enable()
    return {f: TimingReport(f, tuple(per_rep[f]), n, passes) for f in names}


def benchmark(
    filter_name: str,
    data: ImuData,
    repetitions: int = 10,
    settings: FilterSettings | None = None,
    warmup: int = 1,
    passes: int = 1,
) -> TimingReport:
    return benchmark_many([filter_name], data, repetitions, settings, warmup, passes)[check_filter_name(filter_name)]


# --- equivalence -----------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    """Step-by-step divergence between two filters run on the same data."""

    filter_a: str
    filter_b: str
    dq: npt.NDArray[np.float64] = field(repr=False)
    dP: npt.NDArray[np.float64] = field(repr=False)
    tolerance: float
    steps: int
    complete: bool

    @property
    def max_dq(self) -> float:
        return float(self.dq.max()) if self.dq.size else 0.0

    @property
    def max_dP(self) -> float:
        return float(self.dP.max()) if self.dP.size else 0.0

    @property
    def max_divergence(self) -> float:
        return max(self.max_dq, self.max_dP)

    @property
    def passed(self) -> bool:
        return self.complete and self.max_divergence <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "filter_a": self.filter_a,
            "filter_b": self.filter_b,
            "steps": self.steps,
            "max_dq": self.max_dq,
            "max_dP": self.max_dP,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def compare_runs(a: FilterRun, b: FilterRun, tolerance: float = 1e-10) -> EquivalenceReport:
    if a.P is None or b.P is None:
        raise InvalidArgumentError("runs must store covariances")
    m = min(len(a.q), len(b.q))
    dq = np.abs(a.q[:m] - b.q[:m]).max(axis=1) if m else np.zeros(0)
    dP = np.abs(a.P[:m] - b.P[:m]).reshape(m, -1).max(axis=1) if m else np.zeros(0)
    complete = a.ok and b.ok and len(a.q) == len(b.q)
    return EquivalenceReport(a.name, b.name, dq, dP, tolerance, m, complete)


def equivalence_check(
    data: ImuData,
    tolerance: float = 1e-10,
    settings: FilterSettings | None = None,
    filter_a: str = "ckf",
    filter_b: str = "kckf",
) -> EquivalenceReport:
    """Run two filters over ``data`` and report per-step max |dq| and |dP|.

    Both runs are deterministic, so running them one after the other and
    comparing step ``k`` of each is the same as stepping them in lockstep.
    """
    a = run_filter(filter_a, data, settings, store_cov=True)
    b = run_filter(filter_b, data, settings, store_cov=True)
    return compare_runs(a, b, tolerance)


def prediction_divergence(a: Prediction, b: Prediction) -> float:
    """Max abs difference over predicted mean, covariance and point set."""
    return float(
        max(
            np.abs(a.q_pred - b.q_pred).max(),
            np.abs(a.P_pred - b.P_pred).max(),
            np.abs(a.points - b.points).max(),
        )
    )


__all__ = [
    "AggregateRmse",
    "EquivalenceReport",
    "RmseReport",
    "SpeedComparison",
    "TimingReport",
    "aggregate",
    "angle_errors",
    "benchmark",
    "benchmark_many",
    "compare_runs",
    "compare_timing",
    "equivalence_check",
    "prediction_divergence",
    "rmse_euler",
    "rmse_quaternions",
]
