import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_replay
from heapgrowth.deposition import (
    FREE, PERIODIC, BoundaryCondition, ColumnSequence, HeightProfile, PolymerState,
    deposit_hard, deposit_soft, ensemble_profiles, polymer_evolve, replay, replay_batch,
    replay_soft, simulate, trajectory,
)
from heapgrowth.errors import InputDomainError
from heapgrowth.rng import RngStream


def hp(xs):
    return HeightProfile(np.array(xs, dtype=np.int64))


def test_deposit_hard_examples():
    assert deposit_hard(hp([0, 2, 1]), 2, FREE).tolist() == [0, 3, 1]
    assert deposit_hard(hp([3]), 1, FREE).tolist() == [4]
    p = deposit_hard(deposit_hard(hp([0, 0]), 1), 2)
    assert p.tolist() == [1, 2]


def test_free_vs_periodic_edges():
    assert deposit_hard(hp([0, 0, 5]), 1, FREE).tolist() == [1, 0, 5]
    assert deposit_hard(hp([0, 0, 5]), 1, PERIODIC).tolist() == [6, 0, 5]


def test_column_out_of_range():
    with pytest.raises(InputDomainError):
        deposit_hard(hp([0, 0]), 3)
    with pytest.raises(InputDomainError):
        ColumnSequence([0, 1], 2)


def test_simulate_examples(rng):
    assert replay(3, [2, 2, 2]).tolist() == [0, 3, 0]
    prof, seq = simulate(1, 5, rng)
    assert prof.tolist() == [5]
    a, sa = simulate(64, 4096, RngStream(7, 1))
    b, sb = simulate(64, 4096, RngStream(7, 1))
    assert a == b and np.array_equal(sa.events, sb.events)


def test_soft_examples():
    p = deposit_soft(HeightProfile.flat(3, soft=True), 2, 1.0)
    assert p.heights[1] == pytest.approx(math.log(3) + 1, abs=1e-12)
    hard = hp([0, 2, 1])
    for beta in (50.0, 200.0, 1000.0):
        h2 = deposit_soft(hard, 2, beta).heights[1]
        assert 3.0 <= h2 <= 3.0 + math.log(3) / beta + 1e-12


def test_polymer_examples():
    beta = 0.7
    u = math.exp(beta)
    s = polymer_evolve(PolymerState.unit(3, beta), [2])
    assert np.exp(s.log_weights) == pytest.approx([1, 3 * u, 1])
    s = polymer_evolve(s, [2])
    assert math.exp(s.log_weights[1]) == pytest.approx(3 * u * u + 2 * u)


def _path_sum(n, events, u):
    """Sum over directed lattice paths of u^(marked sites), by enumeration.

    A path picks, going back in time from the last event touching column
    i, one of the three neighbours at each earlier event that lands in its
    current column.  Enumerating every path explicitly is exponential but
    fine at N=4, T=6.
    """
    t_len = len(events)

    def paths(col, t):
        # weight of all paths ending in column `col` using events[:t]
        for k in range(t - 1, -1, -1):
            if events[k] - 1 == col:
                total = 0.0
                for j in (col - 1, col, col + 1):
                    if 0 <= j < n:
                        total += paths(j, k)
                return u * total
        return 1.0

    return [paths(i, t_len) for i in range(n)]


def test_polymer_matches_path_enumeration():
    gen = np.random.default_rng(3)
    beta = 0.4
    for _ in range(20):
        ev = (gen.integers(0, 4, 6) + 1).tolist()
        got = np.exp(polymer_evolve(PolymerState.unit(4, beta), ev).log_weights)
        assert got == pytest.approx(_path_sum(4, ev, math.exp(beta)), rel=1e-12)


@pytest.mark.parametrize("beta", [10.0, 50.0, 100.0])
def test_polymer_free_energy_tends_to_heights(beta):
    gen = np.random.default_rng(int(beta))
    for _ in range(20):
        ev = (gen.integers(0, 6, 40) + 1).tolist()
        hard = np.array(brute_replay(6, ev), float)
        f = polymer_evolve(PolymerState.unit(6, beta), ev).free_energy()
        d = f - hard
        assert np.all(d >= -1e-9) and np.all(d <= len(ev) * math.log(3) / beta + 1e-9)


@given(st.integers(1, 7), st.lists(st.integers(0, 100), max_size=60), st.sampled_from(["free", "periodic"]))
@settings(max_examples=200, deadline=None)
def test_replay_matches_oracle_and_monotone(n, raw, bc):
    ev = [r % n + 1 for r in raw]
    periodic = bc == "periodic"
    assert replay(n, ev, bc).tolist() == brute_replay(n, ev, periodic)
    # one column changes per event and heights never drop
    prev = HeightProfile.flat(n)
    for c in ev:
        nxt = deposit_hard(prev, c, bc)
        diff = nxt.heights - prev.heights
        assert np.count_nonzero(diff) == 1 and diff.min() >= 0
        prev = nxt
    assert (prev.h_max if ev else 0) <= len(ev)


@given(st.integers(1, 6), st.lists(st.integers(0, 100), max_size=40),
       st.floats(0.5, 200.0), st.sampled_from(["free", "periodic"]))
@settings(max_examples=150, deadline=None)
def test_soft_hard_sandwich(n, raw, beta, bc):
    ev = [r % n + 1 for r in raw]
    soft = replay_soft(n, ev, beta, bc).heights
    hard = np.array(brute_replay(n, ev, bc == "periodic"), float)
    d = soft - hard
    assert np.all(d >= -1e-9)
    assert np.all(d <= len(ev) * math.log(3) / beta + 1e-9)


def test_single_column_bound():
    assert replay(4, [3] * 11).h_max == 11


def test_trajectory_and_batch_consistent():
    gen = np.random.default_rng(5)
    ev = gen.integers(0, 9, (7, 50)) + 1
    hist = replay_batch(ev, 9, PERIODIC)
    for b in range(7):
        t, cols, hmax, w2 = trajectory(9, ev[b], PERIODIC)
        for k in (0, 10, 49):
            prof = brute_replay(9, ev[b, : k + 1].tolist(), True)
            assert hist[k + 1, b].tolist() == prof
            assert hmax[k] == max(prof)
            assert w2[k] == pytest.approx(np.var(prof))


def test_ensemble_profiles_reproducible_per_run():
    rng = RngStream(99, 4)
    runs = list(ensemble_profiles(16, [5, 20, 40], 4, rng))
    again = dict(ensemble_profiles(16, [5, 20, 40], 4, RngStream(99, 4)))
    for r, prof in runs:
        assert np.array_equal(prof, again[r])
        # run r is the same as replaying rng.child(r) directly
        ev = RngStream(99, 4).child(r).columns(16, 40) + 1
        assert prof[-1].tolist() == brute_replay(16, ev.tolist())


def test_boundary_coerce():
    assert BoundaryCondition.coerce("free") is FREE
    with pytest.raises(InputDomainError):
        BoundaryCondition.coerce("open")
