import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heapgrowth.errors import InputDomainError, IntegrationError
from heapgrowth.integrable import (
    ExpPoly, GaussianRational, RationalPoly, TodaState, anderson_duality_check, bilinear_residual,
    determinant, fraction_str, hamiltonian, isospectrality_check, lax_matrix, lie_checks,
    monodromy_trace, painleve2_check, positions, random_potential, sigma_gauge_check,
    tau_from_phi, time_reversal_error, toda_integrate, toda_rhs, yablonskii,
)
from heapgrowth.integrable.lie import casimir, commutator, sl2_generators, sl3_generators, unit
from heapgrowth.rng import RngStream

Z = RationalPoly.z()
fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(fracs, max_size=6).map(RationalPoly)


# ---------------------------------------------------------------- exact arithmetic


@given(polys, polys, polys)
@settings(max_examples=200, deadline=None)
def test_polynomial_ring_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a - a == RationalPoly()


@given(polys, polys.filter(lambda p: not p.is_zero()))
@settings(max_examples=200, deadline=None)
def test_divmod_identity(a, b):
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.is_zero() or r.degree < b.degree


@given(polys, fracs)
@settings(max_examples=100, deadline=None)
def test_derivative_and_evaluation(p, x):
    # product rule and exact evaluation against a direct power sum
    assert (p * p).derivative() == 2 * p * p.derivative()
    assert p(x) == sum((c * x ** k for k, c in enumerate(p.coeffs)), Fraction(0))


def test_gaussian_rationals():
    i = GaussianRational(0, 1)
    assert i * i == -1
    assert (GaussianRational(1, 2) / GaussianRational(3, -1)) * GaussianRational(3, -1) == GaussianRational(1, 2)
    assert (i / 2) ** 4 == Fraction(1, 16)
    assert fraction_str(Fraction(-3, 4)) == "-3/4"
    with pytest.raises(ZeroDivisionError):
        GaussianRational(1) / 0


def test_exp_poly_derivative():
    e = ExpPoly.exp(2, 3) * ExpPoly.poly(Z)
    # d/ds (3 s e^{2s}) = 3 e^{2s} + 6 s e^{2s}
    assert e.derivative() == ExpPoly({2: RationalPoly([3, 6])})
    assert e(0.5) == pytest.approx(3 * 0.5 * math.exp(1.0))


def test_determinant_matches_numpy():
    gen = np.random.default_rng(0)
    m = gen.integers(-5, 6, (5, 5))
    assert determinant(m.tolist()) == round(np.linalg.det(m))


# ---------------------------------------------------------------- Painleve II


def test_yablonskii_small():
    qs = yablonskii(3)
    assert qs[2] == Z ** 3 + 4
    assert qs[3] == Z ** 6 + 20 * Z ** 3 - 80


def test_yablonskii_degrees_and_integrality():
    qs = yablonskii(12)
    for j, q in enumerate(qs):
        assert q.degree == j * (j + 1) // 2
        assert q.is_integral()
        assert q.coeffs[-1] == 1


def test_q_minus_one_seed():
    # the j = 0 relation forces Q_{-1} = 1
    q0, q1 = yablonskii(1)
    lhs = Z * q0 * q0 - 4 * (q0.derivative(2) * q0 - q0.derivative() ** 2)
    assert lhs == q1 * RationalPoly([1])


def test_painleve_residuals_vanish():
    qs = yablonskii(10)
    for j in range(11):
        assert painleve2_check(j, qs).is_zero(), j


def test_painleve_j1_by_hand():
    # w = -1/z: w'' = -2/z^3 and 2w^3 + z w + 1 = -2/z^3
    w = lambda z: -1 / z  # noqa: E731
    z = 1.7
    assert -2 / z ** 3 == pytest.approx(2 * w(z) ** 3 + z * w(z) + 1)


def test_sigma_gauge():
    rep = sigma_gauge_check(6)
    assert rep.boundary_ok and rep.passed
    assert rep.residuals[1].is_zero() and rep.residuals[2].is_zero()


def test_sigma_gauge_negative_controls():
    assert not sigma_gauge_check(3, amplitude=1).passed
    flipped = sigma_gauge_check(3, exponent_sign=-1)
    assert not flipped.passed
    assert not flipped.residuals[1].is_zero()


# ---------------------------------------------------------------- tau functions


def test_tau_two_exponentials():
    phi = ExpPoly.exp(1) + ExpPoly.exp(2)
    t = tau_from_phi(phi, 4)
    assert t[1] == phi
    assert t[2] == ExpPoly.exp(3)
    assert t[3].is_zero() and t[4].is_zero()
    assert t.rank() == 2
    for j in (1, 2, 3):
        assert bilinear_residual(t, j).is_zero()


def test_tau_rank_one():
    t = tau_from_phi(ExpPoly.exp(1), 2)
    assert t[2].is_zero() and t.rank() == 1


def test_tau_positivity_up_to_rank():
    phi = ExpPoly.exp(Fraction(-1), 2) + ExpPoly.exp(Fraction(1, 2), 3) + ExpPoly.exp(2, Fraction(1, 5))
    t = tau_from_phi(phi, 5)
    assert t.rank() == 3
    for s in (-2.0, 0.0, 1.3):
        assert all(t[j](s) > 0 for j in range(4))
    assert t[4].is_zero() and t[5].is_zero()


def test_tau_positions_solve_toda():
    t = tau_from_phi(ExpPoly.exp(1) + ExpPoly.exp(2), 3)
    s, h = 0.3, 1e-4
    mu = lambda x: positions(t, x)  # noqa: E731
    m0, mp, mm = mu(s), mu(s + h), mu(s - h)
    acc = [(a - 2 * b + c) / h ** 2 for a, b, c in zip(mp, m0, mm)]
    assert m0[0] == pytest.approx(-s - math.log1p(math.exp(s)), abs=1e-14)
    expected = [-math.exp(m0[0] - m0[1]), math.exp(m0[0] - m0[1])]
    assert acc == pytest.approx(expected, abs=1e-6)


# ---------------------------------------------------------------- sl_3


def test_lie_relations_and_casimir():
    rep = lie_checks()
    assert rep.passed
    assert rep.casimir_scalar == Fraction(8, 3)
    g3 = sl3_generators()
    assert np.all(commutator(g3["X1"], g3["X2"]) == g3["X3"])
    assert np.all(commutator(g3["X1"], g3["Y1"]) == g3["X4"])
    assert np.all(g3["X4"] == unit(3, 1, 3))
    g2 = sl2_generators()
    assert np.all(commutator(g2["X1"], g2["X2"]) == g2["X3"])
    assert np.all(casimir(g3) == Fraction(8, 3) * np.eye(3, dtype=object))


# ---------------------------------------------------------------- Toda


def test_toda_rhs_examples():
    s = TodaState([0.0, 0.0], [0.0, 0.0])
    assert toda_rhs(s).tolist() == [-1.0, 1.0]
    far = TodaState([-50.0, 0.0, 50.0], [0.0, 0.0, 0.0])
    assert np.all(np.abs(toda_rhs(far)) < 1e-20)


def test_free_flight():
    s = TodaState([0.1, -0.4, 2.0], [0.3, -1.0, 0.5], kappa=0.0)
    traj = toda_integrate(s, 0.01, 500)
    assert traj.mu[-1] == pytest.approx(s.mu + s.p * 5.0, abs=1e-12)
    rep = isospectrality_check(TodaState(s.mu, s.p, 0.0, "periodic"), dt=0.01, steps=300)
    assert rep.drift == 0.0


def test_two_body_energy_and_centre_of_mass():
    s = TodaState([0.5, -0.5], [0.8, -0.8])
    traj = toda_integrate(s, 1e-3, 10_000, sample_every=100)
    e = traj.energies()
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-8
    assert np.allclose(traj.mu.sum(axis=1), 0.0, atol=1e-12)


def test_momentum_and_energy_periodic():
    s = TodaState.random(16, RngStream(3, 6), bc="periodic")
    traj = toda_integrate(s, 1e-3, 10_000, sample_every=1000)
    e = traj.energies()
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8
    assert np.allclose(traj.p.sum(axis=1), s.p.sum(), atol=1e-11)


def test_time_reversal():
    s = TodaState.random(6, RngStream(1, 6), bc="periodic")
    assert time_reversal_error(s, 1e-3, 10_000) < 1e-6


def test_fourth_order_convergence():
    s = TodaState.random(4, RngStream(2, 6), bc="periodic")
    ref = toda_integrate(s, 1e-3, 2000).state(-1)
    errs = []
    for dt in (0.1, 0.05):
        end = toda_integrate(s, dt, int(round(2.0 / dt))).state(-1)
        errs.append(np.max(np.abs(end.mu - ref.mu)))
    assert 10 < errs[0] / errs[1] < 22


def test_lax_examples():
    zero3 = TodaState(np.zeros(3), np.zeros(3), bc="periodic")
    skew = lax_matrix(zero3, 1.0, "skew")
    assert skew.tolist() == [[0, 1, 1], [1, 0, 1], [-1, 1, 0]]
    ev = np.sort(np.linalg.eigvals(skew).real)
    assert ev == pytest.approx([-1, 0, 1], abs=1e-12)
    n = 7
    op = lax_matrix(TodaState(np.zeros(n), np.zeros(n)))
    ref = np.sort(2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    assert np.linalg.eigvalsh(op) == pytest.approx(ref, abs=1e-12)
    heavy = TodaState(np.zeros(3), np.full(3, 5.0), bc="periodic")
    assert np.all(np.abs(np.linalg.eigvalsh(lax_matrix(heavy)) + 5) <= 2 + 1e-12)


def test_isospectral_periodic_small():
    s = TodaState.random(3, RngStream(7, 6), bc="periodic")
    rep = isospectrality_check(s, dt=1e-3, steps=10_000)
    assert rep.drift < 1e-8 and rep.energy_drift < 1e-8
    assert rep.monodromy_drift < 1e-7
    assert rep.curve["fit_residual"] < 1e-10


def test_skew_convention_is_not_conserved():
    s = TodaState.random(4, RngStream(8, 6), bc="periodic")
    rep = isospectrality_check(s, dt=1e-3, steps=2000, convention="skew")
    assert rep.drift > 1e-4


def test_integration_error_reports_last_state():
    s = TodaState([800.0, 0.0], [0.0, 0.0])
    with pytest.raises(IntegrationError) as info:
        toda_integrate(s, 1e-3, 10)
    assert info.value.last_valid is not None


def test_toda_input_checks():
    with pytest.raises(InputDomainError):
        TodaState([0.0], [0.0, 1.0])
    with pytest.raises(InputDomainError):
        lax_matrix(TodaState([0.0, 0.0], [0.0, 0.0], bc="periodic"))
    with pytest.raises(InputDomainError):
        monodromy_trace(TodaState([0.0, 0.0], [0.0, 0.0]), 0.1)


# ---------------------------------------------------------------- Anderson


def test_anderson_trivial_cases():
    one = anderson_duality_check([0.7])
    assert one.energies.tolist() == [0.7] and one.max_residual == 0.0
    two = anderson_duality_check([0.0, 0.0])
    assert two.energies == pytest.approx([-1.0, 1.0])
    assert two.max_residual == 0.0


def test_anderson_random_chain():
    rng = RngStream(4, 8)
    for k in range(3):
        rep = anderson_duality_check(random_potential(50, rng.child(k)))
        assert rep.max_residual < 1e-8
        assert rep.energies.size == 50


def test_anderson_double_precision_is_reported_not_hidden():
    u = random_potential(50, RngStream(4, 8).child(0))
    rep = anderson_duality_check(u, precision="double")
    assert rep.precision == "double" and np.all(np.isfinite(rep.residuals))
