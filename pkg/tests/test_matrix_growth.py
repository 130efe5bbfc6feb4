import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_replay
from heapgrowth.errors import InputDomainError
from heapgrowth.matrix_growth import (
    BlockMeasure, ProductState, Sl2Block, apply_soft_generator, finite_u_heights, gamma_estimator,
    gamma_ratio, log_top_singular_value, product_lyapunov, radial_coords, ricatti_step,
    tropical_generator, tropical_heights, tropical_heights_batch, tropical_identity, tropical_matmul,
)
from heapgrowth.rng import RngStream

E = math.e
DIAG_E = Sl2Block(E, 0.0, 0.0, 1 / E)


def test_tropical_basics():
    assert tropical_heights([], 4).tolist() == [0, 0, 0, 0]
    assert tropical_heights([2], 3).tolist() == [0, 1, 0]
    g = tropical_generator(3, 2)
    assert np.array_equal(tropical_matmul(tropical_identity(3), g), g)


@given(st.integers(1, 8), st.lists(st.integers(0, 99), max_size=64), st.sampled_from(["free", "periodic"]))
@settings(max_examples=200, deadline=None)
def test_tropical_equals_direct(n, raw, bc):
    ev = [r % n + 1 for r in raw]
    assert tropical_heights(ev, n, bc).tolist() == brute_replay(n, ev, bc == "periodic")


def test_tropical_batch_prefixes():
    gen = np.random.default_rng(1)
    ev = gen.integers(0, 5, (30, 20)) + 1
    hist = tropical_heights_batch(ev, 5)
    for b in range(30):
        for t in (0, 7, 20):
            assert hist[t, b].tolist() == brute_replay(5, ev[b, :t].tolist())


@pytest.mark.parametrize("beta", [10.0, 50.0])
def test_finite_u_converges_to_tropical(beta):
    gen = np.random.default_rng(2)
    for _ in range(10):
        ev = (gen.integers(0, 6, 30) + 1).tolist()
        h = np.array(brute_replay(6, ev), float)
        d = finite_u_heights(ev, 6, beta) - h
        assert np.all(d >= -1e-9) and np.all(d <= len(ev) * math.log(3) / beta + 1e-9)


def _dense(dim, cols, blocks):
    v = np.eye(dim)
    for c, b in zip(cols, blocks):
        g = np.eye(dim)
        g[c - 1 : c + 1, c - 1 : c + 1] = b.matrix()
        v = g @ v
    return v


def test_identity_and_diagonal_products():
    st0 = ProductState(3)
    assert np.array_equal(radial_coords(st0).mu, np.zeros(3))
    st1 = apply_soft_generator(st0, 1, Sl2Block.identity())
    assert np.array_equal(st1.scales, st0.scales) and np.allclose(st1.matrix(), np.eye(3))
    s = ProductState(2)
    for _ in range(25):
        s = apply_soft_generator(s, 1, DIAG_E)
    assert radial_coords(s).mu == pytest.approx([25, -25], abs=1e-12)
    s = ProductState(2)
    s = apply_soft_generator(s, 1, Sl2Block.stretch(2.0))
    assert radial_coords(s).mu == pytest.approx([2, -2], abs=1e-13)


def test_distant_columns_commute_bitwise():
    gen = RngStream(5, 0)
    m = BlockMeasure()
    a, b = m.sample(gen.child(0)), m.sample(gen.child(1))
    s1 = apply_soft_generator(apply_soft_generator(ProductState(5), 1, a), 3, b)
    s2 = apply_soft_generator(apply_soft_generator(ProductState(5), 3, b), 1, a)
    assert np.array_equal(s1.matrix(), s2.matrix())
    n1 = apply_soft_generator(apply_soft_generator(ProductState(5), 1, a), 2, b)
    n2 = apply_soft_generator(apply_soft_generator(ProductState(5), 2, b), 1, a)
    assert not np.allclose(n1.matrix(), n2.matrix())


def test_against_dense_product():
    rng = RngStream(8, 0)
    m = BlockMeasure()
    cols = (rng.columns(5, 60) + 1).tolist()
    blocks = [m.sample(rng.child(k)) for k in range(60)]
    s = ProductState(6)
    for c, b in zip(cols, blocks):
        s = apply_soft_generator(s, c, b)
    dense = _dense(6, cols, blocks)
    sv = np.linalg.svd(dense, compute_uv=False)
    assert radial_coords(s).mu == pytest.approx(np.log(sv), abs=1e-8)
    assert log_top_singular_value(s) == pytest.approx(math.log(sv[0]), abs=1e-10)
    ev = np.sort(np.log(np.abs(np.linalg.eigvals(dense))))[::-1]
    assert radial_coords(s, "eigen").mu == pytest.approx(ev, abs=1e-6)


def test_unit_determinant_long_run():
    rng = RngStream(9, 0)
    t = 3000
    cols = rng.columns(7, t) + 1
    blocks = BlockMeasure(2.0, 2.0).sample_array(rng, t)
    s = ProductState(8)
    for c, b in zip(cols, blocks):
        s._multiply(int(c), b)
    mu = radial_coords(s).mu
    assert abs(mu.sum()) < 1e-8 * t
    assert abs(s.log_abs_det()) < 1e-8 * t


def test_gamma_forced_single_column():
    blocks = np.broadcast_to(DIAG_E.matrix(), (50, 2, 2))
    h, mu = gamma_ratio(1, np.ones(50, np.int64), blocks, [10, 50])
    assert np.array_equal(h, [10, 50])
    assert mu == pytest.approx([10, 50], abs=1e-12)
    assert np.allclose(h / mu, 1.0)


def test_gamma_exhaustive_small_case():
    block = Sl2Block.rotation(0.3) @ Sl2Block.stretch(0.8) @ Sl2Block.shear(0.5)
    blocks = np.broadcast_to(block.matrix(), (3, 2, 2))
    ratios = []
    for cols in itertools.product([1, 2], repeat=3):
        h, mu = gamma_ratio(2, np.array(cols), blocks, [3])
        dense = _dense(3, cols, [block] * 3)
        mu_ref = math.log(np.linalg.svd(dense, compute_uv=False)[0])
        assert h[0] == max(brute_replay(2, list(cols)))
        assert mu[0] == pytest.approx(mu_ref, abs=1e-12)
        ratios.append(h[0] / mu_ref)
    h_all, mu_all = [], []
    for cols in itertools.product([1, 2], repeat=3):
        h, mu = gamma_ratio(2, np.array(cols), blocks, [3])
        h_all.append(h[0] / mu[0])
    assert np.mean(h_all) == pytest.approx(np.mean(ratios), rel=1e-12)


def test_gamma_estimator_deterministic_and_shaped():
    a = gamma_estimator(4, 400, 3, BlockMeasure(), RngStream(1, 1))
    b = gamma_estimator(4, 400, 3, BlockMeasure(), RngStream(1, 1))
    assert np.array_equal(a.mean, b.mean) and a.gamma0 == b.gamma0
    assert a.to_csv().splitlines()[0] == "T,mean,stderr,trials"
    assert len(a.rows()) == 10
    ind = gamma_estimator(4, 400, 3, BlockMeasure(), RngStream(1, 1), mode="independent")
    assert not np.array_equal(ind.mean, a.mean)
    with pytest.raises(InputDomainError):
        gamma_estimator(4, 400, 3, BlockMeasure(), RngStream(1, 1), mode="other")


def test_ricatti_examples():
    assert ricatti_step(0.7, Sl2Block.identity()) == 0.7
    assert ricatti_step(0.5, Sl2Block(0.0, 1.0, -1.0, 0.0)) == pytest.approx(-2.0)
    assert ricatti_step(0.5, Sl2Block.shear(1.0)) == pytest.approx(1.5)
    assert math.isinf(ricatti_step(0.0, Sl2Block(0.0, 1.0, -1.0, 0.0)))


def test_ricatti_matches_vector_action():
    rng = RngStream(4, 0)
    b = BlockMeasure().sample(rng)
    rho = 0.37
    v = b.matrix() @ np.array([rho, 1.0])
    assert ricatti_step(rho, b) == pytest.approx(v[0] / v[1])


def test_product_lyapunov_examples():
    assert product_lyapunov(DIAG_E, 2000) == pytest.approx(1.0, abs=1e-12)
    assert product_lyapunov(BlockMeasure(0.0, 0.0), 5000, RngStream(1, 0)) == pytest.approx(0.0, abs=1e-12)
    vals = [product_lyapunov(BlockMeasure(), 100_000, RngStream(s, 0)) for s in range(10)]
    assert min(vals) > 0
    assert (max(vals) - min(vals)) / np.mean(vals) < 0.02 * 2


def test_block_validation():
    with pytest.raises(InputDomainError):
        Sl2Block(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(InputDomainError):
        apply_soft_generator(ProductState(3), 3, Sl2Block.identity())
    with pytest.raises(InputDomainError):
        BlockMeasure(-1.0, 1.0)
