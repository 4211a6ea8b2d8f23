import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ltpf.config import QoSProfile
from ltpf.errors import AllZero, BadPartition, EmptyInput, LengthMismatch, NonPositiveRate
from ltpf.metrics import (WindowReport, convergence_check, empirical_cdf, jain_index,
                          log_pf_objective, pearson, qos_deviation, window_means,
                          windowed_variance_scaling)

positive = st.floats(1e-3, 1e9, allow_nan=False, allow_infinity=False)


def test_qos_deviation_examples():
    q = QoSProfile([100.0, 200.0])
    assert qos_deviation([100.0, 200.0], q) == 0.0
    assert qos_deviation([200.0, 400.0], q) == 1.0
    assert qos_deviation([90.0, 220.0], q) == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(LengthMismatch):
        qos_deviation([1.0], q)


@settings(max_examples=200)
@given(arrays(float, 5, elements=positive), arrays(float, 5, elements=positive))
def test_qos_deviation_zero_iff_equal(x, g):
    q = QoSProfile(g)
    assert qos_deviation(g, q) == 0.0
    assert (qos_deviation(x, q) == 0.0) == bool(np.all(x == g))


def test_log_pf_objective():
    assert log_pf_objective([1.0, 1.0, 1.0]) == 0.0
    assert log_pf_objective([math.e, math.e ** 2]) == pytest.approx(3.0, rel=1e-14)
    rng = np.random.default_rng(0)
    x = rng.uniform(1e-3, 1e6, 50)
    assert log_pf_objective(x) == pytest.approx(math.fsum(math.log(v) for v in x), rel=1e-12)
    for bad in ([1.0, 0.0], [2.0, -1.0]):
        with pytest.raises(NonPositiveRate):
            log_pf_objective(bad)


def test_jain_index_examples():
    assert jain_index([4.0, 4.0, 4.0]) == pytest.approx(1.0)
    assert jain_index([0.0, 0.0, 7.0, 0.0]) == pytest.approx(0.25)
    assert jain_index([1.0, 3.0]) == pytest.approx(0.8, rel=1e-14)
    with pytest.raises(AllZero):
        jain_index([0.0, 0.0])


@settings(max_examples=200)
@given(arrays(float, st.integers(1, 30), elements=positive), st.floats(1e-3, 1e3))
def test_jain_index_scale_invariant_and_bounded(x, c):
    j = jain_index(x)
    assert 1.0 / x.size - 1e-12 <= j <= 1.0 + 1e-12
    assert jain_index(c * x) == pytest.approx(j, rel=1e-12)


def test_empirical_cdf_examples():
    assert empirical_cdf([5.0]) == [(5.0, 1.0)]
    assert empirical_cdf([3.0, 2.0, 1.0, 2.0]) == [(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]
    with pytest.raises(EmptyInput):
        empirical_cdf([])


@settings(max_examples=200)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_empirical_cdf_axioms(values):
    pts = empirical_cdf(values)
    xs = [p[0] for p in pts]
    fs = [p[1] for p in pts]
    assert xs == sorted(set(xs)) and len(xs) == len(set(values))
    assert all(a <= b for a, b in zip(fs, fs[1:]))
    assert fs[-1] == 1.0
    for v, f in pts:
        assert f == sum(1 for u in values if u <= v) / len(values)


def test_convergence_check():
    q = QoSProfile([100.0, 200.0])
    assert convergence_check([[100.0, 200.0]], q, 0.0).tolist() == [True, True]
    assert convergence_check([[90.0]], QoSProfile([100.0]), 0.05).tolist() == [False]
    series = [[10.0, 10.0], [101.0, 150.0]]
    assert convergence_check(series, q, math.inf).tolist() == [True, True]
    assert convergence_check(series, q).tolist() == [True, False]
    with pytest.raises(LengthMismatch):
        convergence_check([[1.0, 2.0, 3.0]], q)
    with pytest.raises(EmptyInput):
        convergence_check(np.zeros((0, 2)), q)


def test_window_means():
    r = np.arange(12.0).reshape(2, 6)
    np.testing.assert_array_equal(window_means(r, 3), [[1.0, 4.0], [7.0, 10.0]])
    with pytest.raises(BadPartition):
        window_means(r, 4)


def test_variance_scaling_constant_and_single_window():
    r = np.full((3, 100), 7.5)
    out = windowed_variance_scaling(r, [1, 5, 25, 100])
    for m in (1, 5, 25, 100):
        assert np.all(out[m] == 0.0)
    with pytest.raises(BadPartition):
        windowed_variance_scaling(r, [3])


def test_variance_scaling_against_direct():
    rng = np.random.default_rng(1)
    r = rng.normal(size=(2, 40))
    got = windowed_variance_scaling(r, [4])[4]
    for u in range(2):
        chunks = [r[u, i:i + 4].mean() for i in range(0, 40, 4)]
        mu = sum(chunks) / len(chunks)
        sd = math.sqrt(sum((c - mu) ** 2 for c in chunks) / (len(chunks) - 1))
        assert got[u] == pytest.approx(sd, rel=1e-12)


def test_variance_scaling_iid_halves_per_fourfold_window():
    rng = np.random.default_rng(2)
    r = rng.exponential(size=(1, 10_000))
    out = windowed_variance_scaling(r, [1, 4, 5, 20, 25, 100])
    for m in (1, 5, 25):
        assert 1.7 <= out[m][0] / out[4 * m][0] <= 2.3


def test_window_report_build():
    w = WindowReport.build(3, [90.0, 250.0], QoSProfile([100.0, 200.0]), 2)
    assert w.window_index == 3 and w.fallback_events == 2
    np.testing.assert_array_equal(w.qos_gap_bps, [10.0, -50.0])
    assert w.satisfied.tolist() == [False, True]


def test_pearson():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=50), rng.normal(size=50)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], rel=1e-12)
