import random
from fractions import Fraction

import mpmath
import pytest

from heckelab.curves import get_curve, power_character
from heckelab.cyclotomic import CyclotomicInt
from heckelab.fields import QuadInt
from heckelab.lseries import (
    ConvergenceError,
    deninger_ratio,
    gauss_sum,
    gauss_sum_identities,
    l_euler_product,
    l_ideal_sum,
    l_value,
    omega_infinity,
    verify_l_functional_equation,
    verify_unfolding,
)

D = 40
E = get_curve("32a2")


def tol(k=15):
    return mpmath.mpf(10) ** (k - D)


def test_conjugate_character_is_termwise_conjugate():
    pc = power_character(E, 3)
    s = mpmath.mpc(12.5, 0.7)
    with mpmath.workdps(D):
        a = l_ideal_sum(pc.conj(), s, D).value
        b = mpmath.conj(l_ideal_sum(pc, mpmath.conj(s), D).value)
        assert abs(a - b) < tol(10) * abs(a)


def test_ideal_sum_and_euler_product_at_three():
    pc = power_character(E, 2)
    with mpmath.workdps(D):
        ref = l_value(E, 2, 3, D).value
        L1 = l_ideal_sum(pc, 3, 4)
        L2 = l_euler_product(pc, 3, D)
        # at Re(s) - a/2 = 2 both truncations carry bounds far above 10^(10-D)
        assert abs(L1.value - ref) < L1.error_bound
        assert abs(L2.value - ref) < L2.error_bound


@pytest.mark.parametrize("seed", range(10))
def test_ideal_sum_and_euler_product_agree(seed):
    rng = random.Random(seed)
    a = rng.randint(1, 6)
    s = mpmath.mpc(a / 2 + 10 + rng.random() * 3, rng.uniform(-2, 2))
    pc = power_character(get_curve(rng.choice(["32a2", "27a3", "49a1"])), a)
    with mpmath.workdps(D):
        L1 = l_ideal_sum(pc, s, D).value
        L2 = l_euler_product(pc, s, D).value
        assert abs(L1 - L2) < tol(10) * abs(L1)


def test_a1_s5_fast_and_matches_continuation():
    pc = power_character(E, 1)
    with mpmath.workdps(D):
        L = l_ideal_sum(pc, 5, 12)
        assert L.error_bound < mpmath.mpf(10) ** -12
        assert abs(L.value - l_value(E, 1, 5, D).value) < mpmath.mpf(10) ** -11


def test_ideal_sum_refuses_divergent_region():
    with pytest.raises(ConvergenceError):
        l_ideal_sum(power_character(E, 4), 3, D)


@pytest.mark.parametrize("label", ["32a2", "27a3", "49a1"])
@pytest.mark.parametrize("a", range(1, 9))
def test_gauss_identities_exact(label, a):
    c = get_curve(label)
    pc = power_character(c, a)
    rng = random.Random(a)
    us = [QuadInt(rng.randint(-9, 9), rng.randint(-9, 9), c.d) for _ in range(20)]
    r = gauss_sum_identities(pc, us)
    assert r.passed, r
    G = gauss_sum(pc).exact
    assert G * G.conj() == CyclotomicInt.scalar(G.m, pc.f_a.norm())


def test_gauss_sum_numeric_matches_exact():
    pc = power_character(E, 1)
    with mpmath.workdps(50):
        g = gauss_sum(pc)
        assert abs(g.numeric - g.exact.embed()) < mpmath.mpf(10) ** -45
        assert abs(abs(g.numeric) ** 2 - pc.f_a.norm()) < mpmath.mpf(10) ** -45


def test_unfolding_galois_sum_a2():
    assert verify_unfolding(E, 2, 3, "galois-sum", D).rel_residual < tol()


def test_unfolding_level_n_a4():
    assert verify_unfolding(E, 4, 4, "level-N", D).rel_residual < tol()


def test_unfolding_reflected_conductor_a6():
    assert verify_unfolding(E, 6, 5, "reflected-conductor", D).rel_residual < tol()


def test_unfolding_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        verify_unfolding(E, 4, 6, "galois-sum", D)


@pytest.mark.parametrize("a,n", [(2, 3), (4, 4), (3, mpmath.mpc(2.7, 0.6))])
def test_l_functional_equation(a, n):
    assert verify_l_functional_equation(E, a, n, D).rel_residual < tol()


def test_period_determinant_and_conjugate_components():
    per = omega_infinity(E, 1, 2, D)
    with mpmath.workdps(D):
        assert per.residual() < tol()
        assert abs(mpmath.conj(per.closed_form[0]) - per.closed_form[1]) < tol() * abs(per.closed_form[0])


def test_deninger_ratio_exact_a1_n2():
    dr = deninger_ratio(E, 1, 2, D)
    assert dr.exact_ok
    assert dr.expected == 1
    assert dr.recognition_residual < tol()


def test_deninger_ratio_level_factor_a4():
    dr = deninger_ratio(E, 4, 5, D)
    assert dr.exact_ok
    assert dr.expected == Fraction(-4096, 4095)


def test_deninger_ratio_stable_in_precision():
    lo = deninger_ratio(E, 2, 3, 40)
    hi = deninger_ratio(E, 2, 3, 60)
    with mpmath.workdps(40):
        assert abs(lo.ratio - hi.ratio) < mpmath.mpf(10) ** -25 * abs(hi.ratio)
