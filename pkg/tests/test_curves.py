import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.curves import (
    BadReduction,
    CurveData,
    complex_period,
    count_points,
    get_curve,
    hecke_character,
    power_character,
    prime_above,
    psi_of_prime,
    registry,
)
from heckelab.fields import (
    QuadInt,
    divisors,
    elements_of_norm,
    is_prime,
    reduce_mod,
    residue_unit_group,
    splitting_type,
    units,
)

LABELS = ["32a2", "27a3", "49a1"]


def brute_a_q(ainvs, q):
    a1, a2, a3, a4, a6 = ainvs
    pts = 1 + sum(
        1
        for x in range(q)
        for y in range(q)
        if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % q == 0
    )
    return q + 1 - pts


def test_registry_covers_unit_orders():
    ws = {registry()[c].w0 for c in LABELS}
    assert ws == {2, 4, 6}


def test_a5_by_enumeration():
    E = get_curve("32a2")
    assert count_points(E, 5) == brute_a_q(E.ainvs, 5)


def test_a7_vanishes_for_inert():
    assert count_points(get_curve("32a2"), 7) == 0


def test_bad_reduction_rejected():
    with pytest.raises(BadReduction):
        count_points(get_curve("32a2"), 2)
    with pytest.raises(BadReduction):
        count_points(get_curve("49a1"), 7)


@pytest.mark.parametrize("label", LABELS)
def test_point_counts_match_enumeration(label):
    E = get_curve(label)
    for q in range(3, 60):
        if is_prime(q) and E.conductor % q:
            a = count_points(E, q)
            assert a == brute_a_q(E.ainvs, q)
            assert a * a <= 4 * q


@pytest.mark.parametrize("label", LABELS)
def test_inert_primes_have_zero_trace(label):
    E = get_curve(label)
    for q in range(3, 100):
        if is_prime(q) and E.conductor % q and splitting_type(q, E.d) == "inert":
            assert count_points(E, q) == 0


@pytest.mark.parametrize("label", LABELS)
def test_psi_of_split_primes(label):
    E = get_curve(label)
    for q in range(3, 200):
        if not (is_prime(q) and E.conductor % q and splitting_type(q, E.d) == "split"):
            continue
        for g in elements_of_norm(q, E.d)[:2]:
            v = psi_of_prime(E, g)
            assert v.trace() == count_points(E, q)
            assert v.norm() == q
            assert v * v.conj() == q


def test_psi_frak_p_gaussian():
    E = get_curve("32a2")
    pi = prime_above(E, 5)
    v = psi_of_prime(E, pi)
    assert v.norm() == 5 and v.trace() == count_points(E, 5)


@pytest.mark.parametrize("label", LABELS)
def test_psi_on_principal_ideals_is_unit_independent_and_multiplicative(label):
    E = get_curve(label)
    chi = hecke_character(E)
    f = chi.f
    elems = [QuadInt(x, y, E.d) for x in range(-6, 7) for y in range(-6, 7)]
    prime_to_f = [u for u in elems if not u.is_zero() and chi.eps_of(u) is not None]
    for u in prime_to_f[:40]:
        for z in units(E.d):
            assert chi.psi(z * u) == chi.psi(u)
        for v in prime_to_f[::7]:
            assert chi.psi(u * v) == chi.psi(u) * chi.psi(v)
    for r in residue_unit_group(f):
        assert chi.eps_of(r.rep) is not None


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(LABELS), st.integers(1, 12))
def test_power_character_conductor_is_primitive(label, a):
    E = get_curve(label)
    chi = hecke_character(E)
    pc = power_character(E, a)
    assert chi.f.divides(chi.f) and pc.f_a.divides(chi.f)
    one = QuadInt(1, 0, E.d)
    group = [r.rep for r in residue_unit_group(chi.f)]

    def trivial_on_kernel(g):
        return all(chi.eps_of(u) ** a == one for u in group if g.divides(u - one))

    assert trivial_on_kernel(pc.f_a)
    for g in divisors(pc.f_a):
        if g.norm() < pc.f_a.norm():
            assert not trivial_on_kernel(g)
    # epsilon^a multiplicative on unit residues
    for u in group:
        for v in group:
            assert pc.eps_of(u * v) == pc.eps_of(u) * pc.eps_of(v)
    w_a = sum(1 for z in units(E.d) if pc.f_a.divides(z - one))
    assert pc.w_a == w_a
    if pc.trivial:
        assert pc.w_a == E.w0


def test_f1_is_f_and_f4_trivial():
    E = get_curve("32a2")
    assert power_character(E, 1).f_a == hecke_character(E).f
    assert power_character(E, 4).trivial


def test_period_gaussian_curve_matches_agm():
    with mpmath.workdps(60):
        P = complex_period(get_curve("32a2"), 50)
        agm = mpmath.pi / mpmath.agm(1, mpmath.sqrt(2))
        assert abs(P.omega - agm) < mpmath.mpf(10) ** -40
        assert abs(P.A - abs(P.omega) ** 2 * 2 / (2 * mpmath.pi)) < mpmath.mpf(10) ** -40


def test_period_scales_with_model():
    E = get_curve("32a2")
    E2 = CurveData("32a2-scaled", (0, 0, 0, -16, 0), 4, 32, E.psi_conductor)
    with mpmath.workdps(60):
        a = complex_period(E, 50).omega
        b = complex_period(E2, 50).omega
        assert abs(b - a / 2) < mpmath.mpf(10) ** -40


@pytest.mark.parametrize("label", LABELS)
def test_period_reproduces_invariants(label):
    from heckelab.curves import lattice_invariants

    E = get_curve(label)
    with mpmath.workdps(60):
        P = complex_period(E, 40)
        g2, g3 = lattice_invariants(P.omega, E.d, 60)
        m2, m3 = E.g2_g3()
        assert abs(g2 - m2) < mpmath.mpf(10) ** -30 * max(1, abs(m2))
        assert abs(g3 - m3) < mpmath.mpf(10) ** -30 * max(1, abs(m3))


def test_reduce_mod_canonical():
    f = QuadInt(2, 2, 4)
    for x in range(-5, 6):
        for y in range(-5, 6):
            u = QuadInt(x, y, 4)
            assert reduce_mod(u + f * QuadInt(3, -1, 4), f) == reduce_mod(u, f)
