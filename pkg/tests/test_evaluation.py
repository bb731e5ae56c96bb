from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kckf.errors import InvalidArgumentError
from kckf.evaluation import (
    TimingReport,
    aggregate,
    angle_errors,
    benchmark,
    benchmark_many,
    compare_runs,
    compare_timing,
    equivalence_check,
    rmse_euler,
    rmse_quaternions,
)
from kckf.filters import FilterSettings, PointSource, run_filter
from kckf.models import preprocess
from kckf.sim import Scenario, TrajectoryProfile

angles = arrays(np.float64, (20, 3), elements=st.floats(-180, 180))


def test_rmse_examples():
    e = np.array([[10.0, -20.0, 170.0]] * 5)
    assert rmse_euler(e, e).as_tuple() == (0.0, 0.0, 0.0)
    r = rmse_euler([[359.0, 359.0, 359.0]] * 4, [[1.0, 1.0, 1.0]] * 4)
    assert r.as_tuple() == (2.0, 2.0, 2.0)
    r = rmse_euler(e + 5.0, e)
    np.testing.assert_allclose(r.as_tuple(), (5.0, 5.0, 5.0), atol=1e-13)


def test_rmse_wrap_branches():
    assert angle_errors([1.0], [359.0])[0] == 4.0
    assert angle_errors([-179.0], [179.0])[0] == 4.0


def test_rmse_rejects_mismatch():
    with pytest.raises(InvalidArgumentError):
        rmse_euler(np.zeros((3, 3)), np.zeros((4, 3)))
    with pytest.raises(InvalidArgumentError):
        rmse_euler(np.zeros((0, 3)), np.zeros((0, 3)))


@given(angles, angles, arrays(np.bool_, (20, 3)))
def test_rmse_symmetric_and_wrap_invariant(a, b, shift):
    r1 = rmse_euler(a, b).as_tuple()
    assert r1 == rmse_euler(b, a).as_tuple()
    assert all(v >= 0 for v in r1)
    np.testing.assert_allclose(rmse_euler(a, b + 360.0 * shift).as_tuple(), r1, atol=1e-9)


def test_rmse_quaternions_identity():
    q = np.tile([1.0, 0, 0, 0], (3, 1))
    assert rmse_quaternions(q, q).as_tuple() == (0.0, 0.0, 0.0)


def test_aggregate_unbiased():
    from kckf.evaluation import RmseReport

    reps = [RmseReport(1.0, 2.0, 3.0, 10), RmseReport(3.0, 2.0, 5.0, 10)]
    agg = aggregate(reps)
    assert agg.mean == (2.0, 2.0, 4.0)
    np.testing.assert_allclose(agg.std, (np.sqrt(2), 0.0, np.sqrt(2)))
    assert np.isnan(aggregate(reps[:1]).std[0])


def test_timing_report_statistics():
    r = TimingReport("kckf", (1.0, 2.0, 3.0), 100)
    assert r.mean_ms == 2.0 and r.std_ms == 1.0 and r.repetitions == 3
    assert set(r.as_dict()) >= {"filter", "metric", "value", "std", "n"}
    s = compare_timing(TimingReport("a", (1.0, 1.0, 1.0), 1), TimingReport("b", (2.0, 2.0, 2.0), 1))
    assert s.gap_ms == 1.0 and s.reduction == 0.5 and s.gap_in_std == float("inf")


@pytest.fixture(scope="module")
def small_data():
    _, raw = Scenario(TrajectoryProfile("walk-like", duration=20.0), seed=5).build()
    return preprocess(raw)


def test_benchmark_with_fake_clock(small_data):
    ticks = iter(range(10_000))
    reps = benchmark_many(["kckf", "ckf"], small_data, repetitions=3, passes=2, clock=lambda: next(ticks))
    # every timed call spans exactly one tick of the fake clock
    for r in reps.values():
        assert r.per_rep_ms == (1e3 / len(small_data),) * 3 and r.passes == 2


def test_benchmark_validation(small_data):
    with pytest.raises(InvalidArgumentError):
        benchmark("kckf", small_data, repetitions=2)
    empty = type(small_data)(np.zeros(0), np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3)))
    with pytest.raises(InvalidArgumentError):
        benchmark("kckf", empty, repetitions=3)
    with pytest.raises(NotImplementedError):
        benchmark("kukf", small_data, repetitions=3)


def test_benchmark_same_filter_same_magnitude(small_data):
    # wall clock on a shared host: only the order of magnitude is stable
    a = benchmark("kckf", small_data, repetitions=5, passes=3)
    b = benchmark("kckf", small_data, repetitions=5, passes=3)
    assert a.mean_ms > 0 and b.mean_ms > 0
    assert 1 / 3 < a.mean_ms / b.mean_ms < 3


def test_equivalence_self_is_zero(small_data):
    run = run_filter("kckf", small_data, store_cov=True)
    rep = compare_runs(run, run)
    assert rep.max_divergence == 0.0 and rep.passed


@pytest.mark.parametrize("mode", ["redraw", "reuse"])
def test_equivalence_ckf_kckf(small_data, mode):
    rep = equivalence_check(small_data, 1e-10, FilterSettings(mode=PointSource(mode)))
    assert rep.passed and rep.steps == len(small_data)


def test_equivalence_flags_different_families(small_data):
    rep = equivalence_check(small_data, 1e-10, filter_a="ckf", filter_b="ekf")
    assert not rep.passed and rep.max_divergence > 1e-6
