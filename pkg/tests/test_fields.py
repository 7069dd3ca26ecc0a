from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.fields import (
    CLASS_NUMBER_ONE,
    FieldError,
    KElement,
    NoRecognition,
    QuadInt,
    ResidueClass,
    as_k,
    check_disc,
    omega_complex,
    padic_embed_K,
    recognize_in_K,
    recognize_rational,
    residue_unit_group,
    unit_count,
    units,
)

discs = st.sampled_from(CLASS_NUMBER_ONE)
ints = st.integers(-10**6, 10**6)


@st.composite
def quad(draw, d=None):
    d = d if d is not None else draw(discs)
    return QuadInt(draw(ints), draw(ints), d)


@st.composite
def quad_pair(draw):
    d = draw(discs)
    return draw(quad(d)), draw(quad(d))


@st.composite
def k_elem(draw, d=None, bound=10**4):
    d = d if d is not None else draw(discs)
    fr = st.fractions(min_value=-bound, max_value=bound, max_denominator=bound)
    return KElement(draw(fr), draw(fr), d)


@given(quad_pair())
def test_norm_multiplicative(uv):
    u, v = uv
    assert (u * v).norm() == u.norm() * v.norm()


@given(quad())
def test_trace_and_norm_from_conjugate(u):
    assert u + u.conj() == u.trace()
    assert u * u.conj() == u.norm()
    assert u.norm() >= 0
    assert u.conj().conj() == u


@given(quad_pair())
def test_ring_axioms(uv):
    u, v = uv
    w = u - v
    assert u * (v + w) == u * v + u * w
    assert u * v == v * u
    assert (u + v) - v == u


@given(quad_pair())
def test_division_round_trip(uv):
    u, v = uv
    if v.is_zero():
        with pytest.raises(ZeroDivisionError):
            u / v
    else:
        assert (u / v) * v == u


@pytest.mark.parametrize("d,w0", [(3, 6), (4, 4), (7, 2), (163, 2)])
def test_unit_group_order(d, w0):
    assert unit_count(d) == w0
    assert all(u.norm() == 1 for u in units(d))


def test_rejects_class_number_two():
    with pytest.raises(FieldError):
        check_disc(15)


def test_embedding_is_homomorphism():
    with mpmath.workdps(40):
        for d in CLASS_NUMBER_ONE:
            u, v = QuadInt(3, -2, d), QuadInt(-5, 7, d)
            assert abs((u * v).to_complex() - u.to_complex() * v.to_complex()) < mpmath.mpf(10) ** -35
            assert omega_complex(d).imag > 0


# residue rings


def test_residue_group_trivial_modulus():
    assert len(residue_unit_group(QuadInt(1, 0, 4))) == 1


def test_residue_group_mod_3_in_gaussian_integers():
    assert len(residue_unit_group(QuadInt(3, 0, 4))) == 8


def test_residue_group_mod_cube_of_1_plus_i():
    f = QuadInt(1, 1, 4) ** 3
    # enumerate O_K/f by brute force: 8 residues, units are the odd ones
    group = residue_unit_group(f)
    assert len(group) == 4
    assert len({g.rep for g in group}) == 4


def test_zero_modulus_rejected():
    with pytest.raises(FieldError):
        residue_unit_group(QuadInt(0, 0, 4))


@pytest.mark.parametrize("f", [QuadInt(2, 2, 4), QuadInt(3, 0, 3), QuadInt(-1, 2, 7), QuadInt(5, 1, 4), QuadInt(4, 3, 7)])
def test_residue_group_closed(f):
    group = residue_unit_group(f)
    reps = {g.rep for g in group}
    for a in group:
        assert a.inverse().rep in reps
        for b in group:
            assert (a * b).rep in reps


@settings(max_examples=50)
@given(quad(4), quad(4))
def test_residue_equality_iff_divisible(u, v):
    f = QuadInt(2, 2, 4)
    same = ResidueClass(u, f).rep == ResidueClass(v, f).rep
    assert same == f.divides(u - v)


# recognition


def test_recognize_rational_constructed():
    with mpmath.workdps(60):
        assert recognize_in_K(mpmath.mpf(3) / 4, 4, 10**6, mpmath.mpf(10) ** -50) == KElement(Fraction(3, 4), 0, 4)


def test_recognize_gaussian_third():
    with mpmath.workdps(60):
        z = (1 + 2j * mpmath.mpf(1)) / 3
        assert recognize_in_K(z, 4, 10**6, mpmath.mpf(10) ** -50) == KElement(Fraction(1, 3), Fraction(2, 3), 4)


def test_pi_not_recognized():
    with mpmath.workdps(60):
        with pytest.raises(NoRecognition):
            recognize_in_K(mpmath.pi, 4, 10**6, mpmath.mpf(10) ** -50)


def test_negative_rational_keeps_sign():
    with mpmath.workdps(60):
        assert recognize_rational(mpmath.mpf(-1) / 4, 100, mpmath.mpf(10) ** -50) == Fraction(-1, 4)


@settings(max_examples=1000, deadline=None)
@given(k_elem())
def test_recognition_inverts_embedding(x):
    with mpmath.workdps(60):
        assert recognize_in_K(x.to_complex(), x.d, 10**8, mpmath.mpf(10) ** -50) == as_k(x)


# p-adic embedding


def test_embed_gaussian_5():
    r = padic_embed_K(5, 6, 4)
    assert (r * r + 1) % 5**6 == 0


def test_embed_branch_follows_seed():
    for seed in (2, 3):
        assert padic_embed_K(5, 8, 4, seed) % 5 == seed


def test_embed_rejects_inert():
    with pytest.raises(FieldError):
        padic_embed_K(3, 4, 4)


def test_embed_rejects_ramified():
    with pytest.raises(FieldError):
        padic_embed_K(2, 4, 4)


@given(st.sampled_from([(4, 5), (4, 13), (4, 17), (3, 7), (3, 13), (7, 11), (7, 23), (8, 3), (11, 3)]),
       st.integers(1, 20))
def test_embed_full_precision(dp, M):
    d, p = dp
    from heckelab.fields import omega_trace_norm

    t, n = omega_trace_norm(d)
    r = padic_embed_K(p, M, d)
    assert (r * r - t * r + n) % p**M == 0
