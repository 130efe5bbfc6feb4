import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heapgrowth.analysis import (
    EnsembleAccumulator, WidthSeries, checkpoints_for, collapse, fit_velocity, growth_exponent,
    height_moments, height_samples, simulate_widths, width,
)
from heapgrowth.errors import InputDomainError
from heapgrowth.rng import RngStream


def acc_of(profiles, checkpoints=(1,)):
    a = EnsembleAccumulator(len(profiles[0][0]), list(checkpoints))
    for p in profiles:
        a.add(np.array(p, np.int64))
    return a


def test_width_examples():
    assert width(acc_of([[[1, 2, 3]], [[1, 2, 3]], [[1, 2, 3]]]), 1) == 0.0
    assert width(acc_of([[[3]], [[5]]]), 1) == 1.0
    a = acc_of([[[0, 2]], [[2, 0]]])
    assert a.column_variance(1).tolist() == [1.0, 1.0]
    assert width(a, 1) == 1.0


def test_width_needs_two_runs():
    with pytest.raises(InputDomainError):
        width(acc_of([[[1, 2]]]), 1)
    with pytest.raises(InputDomainError):
        acc_of([[[1, 2]]]).add(np.array([[0.5, 1.0]]))


profiles_strategy = st.lists(
    st.lists(st.integers(0, 10 ** 6), min_size=3, max_size=3), min_size=2, max_size=12
)


@given(profiles_strategy, st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_merge_is_exact_and_order_free(rows, rnd):
    data = [[r] for r in rows]
    whole = acc_of(data)
    cut = rnd.randrange(1, len(data))
    left, right = acc_of(data[:cut]), acc_of(data[cut:])
    merged = left.merge(right)
    assert merged == whole
    assert right.merge(left) == whole
    shuffled = list(data)
    rnd.shuffle(shuffled)
    assert width(acc_of(shuffled), 1) == width(whole, 1)
    # oracle: population variance from exact rationals
    arr = np.array(rows, dtype=object)
    r = len(rows)
    for i in range(3):
        col = [int(x) for x in arr[:, i]]
        exact = (r * sum(x * x for x in col) - sum(col) ** 2) / (r * r)
        assert whole.column_variance(1)[i] == pytest.approx(exact, rel=1e-15, abs=0)
        assert whole.column_variance(1)[i] >= 0


def test_merge_associative():
    gen = np.random.default_rng(0)
    parts = [acc_of([[gen.integers(0, 50, 4).tolist()] for _ in range(3)]) for _ in range(3)]
    a, b, c = parts
    assert a.merge(b).merge(c) == a.merge(b.merge(c))


def test_growth_exponent_synthetic():
    # N = 10^4 puts tau in [1, 1000] at u <= 1e-3, well inside the default window
    tau = np.geomspace(1, 1000, 30)
    s = WidthSeries(10_000, tau, 7.3 * tau ** (1 / 3))
    f = growth_exponent(s, (0, 0.1))
    assert abs(f.exponent - 1 / 3) < 1e-12 and not f.warnings
    flat = growth_exponent(WidthSeries(10_000, tau, np.full(30, 2.0)), (0, 0.1))
    assert abs(flat.exponent) < 1e-12
    for beta, c in [(0.25, 1e-3), (0.5, 1e3)]:
        fit = growth_exponent(WidthSeries(10_000, tau, c * tau ** beta), (0, 0.1))
        assert abs(fit.exponent - beta) < 1e-12


def test_growth_exponent_warns_on_thin_window():
    tau = np.geomspace(1, 1000, 30)
    s = WidthSeries(1, tau, tau ** 0.3)
    with pytest.warns(UserWarning):
        f = growth_exponent(s, (1, 4))
    assert f.warnings
    with pytest.raises(InputDomainError):
        growth_exponent(s, (5000, 6000))


def test_width_series_invariants():
    with pytest.raises(InputDomainError):
        WidthSeries(4, [1.0, 1.0], [0.0, 1.0])
    with pytest.raises(InputDomainError):
        WidthSeries(4, [1.0, 2.0], [-1.0, 1.0])
    s = WidthSeries(16, [64.0], [2.0])
    assert s.u[0] == pytest.approx(1.0)


def _master(u):
    return np.where(u < 1, u ** (1 / 3), 1.0)


def test_collapse_of_exact_master_curve():
    series = []
    for n in (16, 32, 64):
        u = np.geomspace(0.01, 10, 20)
        series.append(WidthSeries(n, u * n ** 1.5, np.sqrt(n) * _master(u)))
    rep = collapse(series)
    assert rep.comparable and rep.mismatch < 1e-12
    assert rep.roughness.exponent == pytest.approx(0.5, abs=1e-12)


def test_collapse_without_overlap():
    series = [WidthSeries(n, np.array([1.0, 2.0]) * k, np.array([1.0, 2.0])) for k, n in ((1, 4), (10, 8), (100, 16))]
    rep = collapse(series)
    assert not rep.comparable
    with pytest.raises(InputDomainError):
        collapse(series[:2])


def test_moments_controls():
    gen = np.random.default_rng(1)
    g = height_moments(gen.normal(3, 2, 200_000))
    assert abs(g.skewness) < 4 * g.skewness_stderr
    assert abs(g.kurtosis) < 0.05
    c = height_moments(np.full(20_000, 7.0))
    assert c.variance == 0.0
    small = height_moments(gen.normal(size=500))
    assert small.warnings


def test_velocity_fit():
    assert fit_velocity([1, 2, 3, 4], [2.5, 4.5, 6.5, 8.5]) == pytest.approx(2.0)


def test_simulate_widths_matches_manual_ensemble():
    taus = [0.5, 2.0, 8.0]
    s, acc = simulate_widths(12, taus, 5, RngStream(3, 2))
    cps = checkpoints_for(12, taus)
    assert cps.tolist() == [6, 24, 96]
    from conftest import brute_replay
    runs = [brute_replay(12, (RngStream(3, 2).child(r).columns(12, 96) + 1)[:96].tolist()) for r in range(5)]
    arr = np.array(runs, float)
    assert s.width[-1] == pytest.approx(np.sqrt(arr.var(axis=0).mean()), rel=1e-12)


def test_height_samples_shapes():
    d = height_samples(128, [4, 8], 10, RngStream(1, 9), column_stride=16, margin=16)
    assert len(d["columns"]) == 2 and d["columns"][0].size == 10 * 6
    assert d["hmax"][1].size == 10
    assert np.all(d["hmax"][1] >= d["hmax"][0])
