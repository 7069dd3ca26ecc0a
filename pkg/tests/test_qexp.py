from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.cyclotomic import CyclotomicInt, PadicCyclotomic, frobenius_sigma
from heckelab.qexp import (
    DepthError,
    NormalizationError,
    QExpansion,
    build_moment_grid,
    differential_equation,
    dlogq,
    eis_p,
    eis_p_exact,
    eis_p_measure,
    eisenstein_divisor,
    eisenstein_qexp,
    frobenius_phistar,
    galois_label,
    galois_qexp,
    kummer_pairs,
    oracle_check,
    pointwise_check,
    qexp_kummer,
    removal_identity,
    stabilization_gap,
    syntomic_exact_cancellation,
    syntomic_section,
    verify_syntomic_ode,
)

N = 8
RHO = (1, 3)


def series(coeffs, N=N):
    return QExpansion(N, tuple(CyclotomicInt.scalar(N, c) for c in coeffs))


@st.composite
def exact_series(draw, order=10):
    return QExpansion(N, tuple(
        CyclotomicInt(N, tuple(draw(st.integers(-20, 20)) for _ in range(4))) for _ in range(order)))


def padic(f, p=5, M=4):
    return f.to_padic(p, M)


# operators


def test_dlogq_small_cases():
    # exponents are in units of 1/N
    assert dlogq(series([1])).is_zero()
    q = series([0] * N + [1])
    assert dlogq(q) == q
    f = series([0] * (2 * N) + [3])
    assert dlogq(f) == series([0] * (2 * N) + [6])


@settings(max_examples=30, deadline=None)
@given(exact_series(), exact_series())
def test_dlogq_is_derivation(f, g):
    assert dlogq(f * g) == dlogq(f) * g + f * dlogq(g)


def test_phistar_on_monomial():
    c = CyclotomicInt.zeta(N, 1) + 2
    f = QExpansion(N, tuple([CyclotomicInt.scalar(N, 0), c] + [CyclotomicInt.scalar(N, 0)] * 10)).to_padic(5, 4)
    g = frobenius_phistar(f)
    assert g.coeffs[5] == frobenius_sigma(PadicCyclotomic(5, 4, c))
    assert all(g.coeffs[i] == f.zero_coeff() for i in range(len(g.coeffs)) if i != 5)


@settings(max_examples=25, deadline=None)
@given(exact_series(12), exact_series(12))
def test_phistar_ring_homomorphism_and_chain_rule(f, g):
    F, G = padic(f), padic(g)
    assert frobenius_phistar(F * G) == frobenius_phistar(F) * frobenius_phistar(G)
    assert frobenius_phistar(F + G) == frobenius_phistar(F) + frobenius_phistar(G)
    assert dlogq(frobenius_phistar(F)) == frobenius_phistar(dlogq(F)).scale(5)


def test_phistar_truncation_reports_valid_order():
    f = padic(series(range(1, 7)))
    assert frobenius_phistar(f, order=100).order == 30
    with pytest.raises(ValueError):
        frobenius_phistar(series([1, 2]), p=2)


@settings(max_examples=20, deadline=None)
@given(exact_series(8))
def test_text_round_trip(f):
    g = QExpansion(f.N, f.coeffs, label=(3, 1))
    back = QExpansion.from_text(g.to_text())
    assert back == g and back.label == (3, 1)
    h = padic(g, 7, 3)
    assert QExpansion.from_text(h.to_text()) == h


# classical series


def test_constant_terms_are_bernoulli():
    # r = 0 gives -B_K(0)/K
    assert eisenstein_qexp(2, (0, 1), 4).coeffs[0] == CyclotomicInt.scalar(N, Fraction(1, 120))
    assert eisenstein_qexp(1, (0, 1), 4).coeffs[0] == CyclotomicInt.scalar(N, 0)


def test_oracle_small():
    res = oracle_check(1, RHO, n_coeffs=12, digits=30, tol=mpmath.mpf(10) ** -20)
    assert res.first_bad is None and res.residual < mpmath.mpf(10) ** -20


def test_oracle_detects_wrong_normalization(monkeypatch):
    import heckelab.qexp as qx

    real = qx.eisenstein_qexp
    monkeypatch.setattr(qx, "eisenstein_qexp", lambda k, rho, Q, N=8: real(k, rho, Q, N).scale(2))
    with pytest.raises(NormalizationError):
        qx.oracle_check(1, RHO, n_coeffs=6, digits=25)


def test_series_value_matches_lattice_pointwise():
    err = pointwise_check(2, (3, 1), [mpmath.mpc(0.1, 1.2), mpmath.mpc(-0.3, 0.9)], digits=25, Q=300)
    assert err < mpmath.mpf(10) ** -15


@pytest.mark.parametrize("c", [3, 5, 7])
def test_galois_equivariance(c):
    for rho in [(1, 3), (5, 2), (2, 1)]:
        f = eisenstein_qexp(2, rho, 30)
        assert galois_qexp(f, c) == eisenstein_qexp(2, galois_label(rho, c, N), 30)


def test_divisor_linearity():
    phi = {(1, 3): 2, (3, 1): -1}
    E = eisenstein_divisor(1, phi, 20)
    assert E == eisenstein_qexp(1, (1, 3), 20).scale(2) - eisenstein_qexp(1, (3, 1), 20)


def test_galois_orbit_sum_descends():
    orbit = {galois_label((1, 1), c, N): 1 for c in (1, 3, 5, 7)}
    assert eisenstein_divisor(2, orbit, 20).descends_to_Q()
    assert not eisenstein_qexp(2, (1, 1), 20).descends_to_Q()


def test_bad_inputs():
    with pytest.raises(ValueError):
        eisenstein_qexp(1, (0, 0), 5)
    with pytest.raises(ValueError):
        eisenstein_qexp(0, RHO, 5)
    with pytest.raises(ValueError):
        eisenstein_qexp(1, RHO, 5, N=2)


# p-adic family

P, M, Q = 5, 4, 30


@pytest.mark.parametrize("k,l", [(1, 0), (2, 1), (1, 3), (4, 2)])
def test_removal_identity(k, l):
    assert removal_identity(k, l, RHO, Q, P, M).passed


def test_exact_and_measure_routes_agree():
    for k, l in [(1, 0), (3, 2)]:
        assert eis_p_exact(k, l, RHO, Q, P).to_padic(P, M) == eis_p_measure(k, l, RHO, Q, P, M)


def test_coefficient_at_q_to_the_p_vanishes_for_l_minus_one():
    # q^p sits at grid index pN; every factorisation of 40 with d = +-1 mod 8 has p | m
    f = eis_p(1, -1, RHO, P * N + 1, P, M)
    assert f.coeffs[P * N] == f.zero_coeff()
    assert f.coeffs[N] != f.zero_coeff()


@pytest.mark.parametrize("k,l", [(1, -1), (2, -2), (1, 0), (3, 2)])
def test_differential_equation(k, l):
    assert differential_equation(k, l, RHO, Q, P, M).passed


def test_negative_twist_depth():
    with pytest.raises(DepthError):
        eis_p(1, -1, RHO, Q, P, M, depth=1)
    for depth in range(3):
        assert stabilization_gap(1, -1, RHO, Q, P, depth) >= depth + 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_syntomic_ode(k):
    assert verify_syntomic_ode(k, RHO, Q, P, M).passed


def test_syntomic_section_shape():
    sec = syntomic_section(2, RHO, Q, P, M)
    assert len(sec.components) == 3
    assert sec.frobenius_exponents == (-3, -2, -1)
    with pytest.raises(ValueError):
        syntomic_section(5, RHO, Q, P, M)


def test_syntomic_cancellation_exact():
    assert syntomic_exact_cancellation(2, RHO, 20, P, 1)


def test_broken_section_is_caught(monkeypatch):
    import heckelab.qexp as qx

    real = qx.syntomic_section

    def broken(*a, **kw):
        sec = real(*a, **kw)
        comps = list(sec.components)
        comps[1] = comps[1].scale(2)
        return qx.SyntomicSection(sec.k, tuple(comps), sec.frobenius_exponents, sec.p, sec.M)

    monkeypatch.setattr(qx, "syntomic_section", broken)
    res = qx.verify_syntomic_ode(2, RHO, Q, P, M)
    assert not res.passed and res.first_failure[0] in (0, 1)


def test_kummer_examples():
    grid = build_moment_grid(RHO, kmax=2, lmax=2, Q=Q, p=P, M=3)
    assert qexp_kummer(grid, [((1, 0), (5, 0))], 0).passed
    assert qexp_kummer(grid, [((1, 1), (1, 5))], 0).passed
    with pytest.raises(ValueError):
        qexp_kummer(grid, [((1, 0), (2, 0))], 0)


def test_kummer_depth_one():
    grid = build_moment_grid(RHO, kmax=2, lmax=1, Q=Q, p=P, M=3)
    rep = qexp_kummer(grid, list(kummer_pairs(2, 1, P, 1)), 1)
    assert rep.passed and rep.checked == 12


def test_kummer_finds_planted_failure():
    grid = build_moment_grid(RHO, kmax=1, lmax=0, Q=Q, p=P, M=2)
    grid.table[(5, 0)] = grid.get(5, 0) + grid.get(1, 0)
    assert not qexp_kummer(grid, [((1, 0), (5, 0))], 0).passed
