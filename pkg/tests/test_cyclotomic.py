from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.cyclotomic import (
    CyclotomicInt,
    PadicCyclotomic,
    embed_K,
    euler_phi,
    frobenius_sigma,
    multiplicative_order,
    sqrt_minus_d_cyc,
)
from heckelab.fields import QuadInt, sqrt_minus_d

orders = st.sampled_from([3, 4, 5, 8, 12, 15, 16])


@st.composite
def cyc(draw, m):
    return CyclotomicInt(m, tuple(draw(st.integers(-50, 50)) for _ in range(euler_phi(m))))


@st.composite
def cyc_triple(draw):
    m = draw(orders)
    return draw(cyc(m)), draw(cyc(m)), draw(cyc(m))


@settings(max_examples=60)
@given(cyc_triple())
def test_ring_axioms(t):
    a, b, c = t
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == CyclotomicInt.scalar(a.m, 0)


@settings(max_examples=40)
@given(cyc_triple())
def test_embedding_is_homomorphism(t):
    a, b, _ = t
    with mpmath.workdps(40):
        assert abs((a * b).embed() - a.embed() * b.embed()) < mpmath.mpf(10) ** -30
        assert abs((a + b).embed() - a.embed() - b.embed()) < mpmath.mpf(10) ** -30


@settings(max_examples=30)
@given(cyc_triple())
def test_inverse(t):
    a, _, _ = t
    if all(c == 0 for c in a.coeffs):
        return
    assert a * a.inverse() == CyclotomicInt.scalar(a.m, 1)


@given(orders, st.integers(-40, 40), st.integers(-40, 40))
def test_zeta_powers(m, i, j):
    z = CyclotomicInt.zeta
    assert z(m, i) * z(m, j) == z(m, i + j)
    assert z(m, m) == CyclotomicInt.scalar(m, 1)


@given(orders, st.integers(1, 100))
def test_galois_is_automorphism(m, c):
    if gcd(c, m) != 1:
        with pytest.raises(ValueError):
            CyclotomicInt.zeta(m).galois(c)
        return
    a, b = CyclotomicInt.zeta(m, 1) + 2, CyclotomicInt.zeta(m, 3) - 5
    assert (a * b).galois(c) == a.galois(c) * b.galois(c)


def test_sqrt_minus_d_matches_field_embedding():
    for d, m in ((3, 3), (4, 4), (7, 7), (8, 8)):
        s = sqrt_minus_d_cyc(d, m)
        assert s * s == CyclotomicInt.scalar(m, -d)
        with mpmath.workdps(30):
            assert abs(s.embed() - sqrt_minus_d(d).to_complex()) < mpmath.mpf(10) ** -25


def test_embed_K_consistent():
    u = QuadInt(3, -7, 4)
    with mpmath.workdps(30):
        assert abs(embed_K(u, 8).embed() - u.to_complex()) < mpmath.mpf(10) ** -25


# p-adic reductions


def test_sigma_fixes_one():
    one = PadicCyclotomic(5, 6, CyclotomicInt.scalar(8, 1))
    assert frobenius_sigma(one) == one


def test_sigma_on_zeta8():
    z = PadicCyclotomic(5, 6, CyclotomicInt.zeta(8))
    assert frobenius_sigma(z) == PadicCyclotomic(5, 6, CyclotomicInt.zeta(8, 5))


@pytest.mark.parametrize("m,p", [(8, 5), (8, 3), (12, 5), (7, 2), (15, 7)])
def test_sigma_order(m, p):
    x = PadicCyclotomic(p, 4, CyclotomicInt.zeta(m) + 3 * CyclotomicInt.zeta(m, 2))
    y = x
    k = multiplicative_order(p, m)
    for i in range(k):
        y = frobenius_sigma(y)
        assert (y == x) == (i == k - 1)


def test_sigma_rejects_p_dividing_m():
    with pytest.raises(ValueError):
        PadicCyclotomic(2, 4, CyclotomicInt.zeta(8))


@settings(max_examples=40)
@given(st.data())
def test_reduction_is_homomorphism(data):
    m, p = data.draw(st.sampled_from([(8, 5), (8, 3), (12, 7)]))
    a, b = data.draw(cyc(m)), data.draw(cyc(m))
    R = lambda x: PadicCyclotomic(p, 5, x)  # noqa: E731
    assert R(a * b) == R(a) * R(b)
    assert R(a + b) == R(a) + R(b)
    assert frobenius_sigma(R(a) * R(b)) == frobenius_sigma(R(a)) * frobenius_sigma(R(b))


def test_non_integral_rejected():
    with pytest.raises(ValueError):
        PadicCyclotomic(5, 3, CyclotomicInt.scalar(8, Fraction(1, 5)))
