"""Moments of the measure attached to psi^a: Euler factors, the critical
moment family, Kummer batteries, the pseudo-measure quotient for f_a = (1),
and the assembled verdict for non-critical n.

Everything p-adic here is exact arithmetic in K (or Q(zeta_m)); congruences
are tested by the exact valuation at the prime p = (pi) singled out by the
registry seed, which is also the prime for which psi(p) appears in the Euler
factors.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath
import sympy

from .cache import cached, decode_mp, encode_mp
from .curves import (
    CurveData,
    complex_period,
    is_ordinary_split,
    power_character,
    prime_above,
    psi_of_prime,
)
from .cyclotomic import CyclotomicInt, embed_K
from .fields import (
    KElement,
    NoRecognition,
    QuadInt,
    as_k,
    padic_embed_K,
    recognize_in_K,
    splitting_type,
)
from .lattice import GUARD, PoleError, galois_eis_sum
from .lseries import gauss_order, gauss_sum, l_alg, deninger_ratio

DEFAULT_N = 8


class NotOrdinary(ValueError):
    pass


def _k(x, d: int) -> KElement:
    return as_k(x) if not isinstance(x, (int, Fraction)) else KElement(Fraction(x), Fraction(0), d)


def frak_valuation(x, pi: QuadInt, p: int) -> int | None:
    """Exact valuation of x in K at the prime (pi) above the split prime p; None for x = 0."""
    x = as_k(x)
    if x.is_zero():
        return None
    den = x.denominator()
    y = as_k(x * den).to_int()
    v = 0
    while pi.divides(y):
        y = y.exact_div(pi)
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _check_prime(curve: CurveData, p: int):
    if splitting_type(p, curve.d) != "split":
        raise NotOrdinary(f"p={p} is not split in Q(sqrt(-{curve.d}))")
    if not is_ordinary_split(curve, p):
        raise NotOrdinary(f"p={p} is not a prime of good ordinary reduction for {curve.label}")


# -------------------------------------------------------------- Euler factors


@dataclass(frozen=True)
class EulerFactors:
    a: int
    n: int
    p: int
    first: KElement   # 1 - psi(p)^a / p^n
    second: KElement  # 1 - conj(psi(p*))^a / p^(a+1-n)

    @property
    def product(self) -> KElement:
        return self.first * self.second


def euler_factors(curve: CurveData, a: int, n: int, p: int) -> EulerFactors:
    """Both factors, with psi(p*) computed from its own generator."""
    _check_prime(curve, p)
    pi = prime_above(curve, p)
    psi_p = psi_of_prime(curve, pi)
    psi_pstar_bar = psi_of_prime(curve, pi.conj()).conj()
    d = curve.d
    one = KElement(Fraction(1), Fraction(0), d)
    first = one - _k(psi_p**a, d) / Fraction(p) ** n
    second = one - _k(psi_pstar_bar**a, d) / Fraction(p) ** (a + 1 - n)
    return EulerFactors(a, n, p, first, second)


def level_factor(a: int, n: int, N: int = DEFAULT_N) -> Fraction:
    """Moment of the two-point measure: N^(a+2)/N^(2n) - 1."""
    return Fraction(N) ** (a + 2 - 2 * n) - 1


# ------------------------------------------------------------ moment family


@dataclass
class MomentFamily:
    """W_n for critical 0 < n <= a, exact in K.

    V_n = G(eps^a) conj(Omega)^a Gamma(n) L(psi^a, n) / (A^(a-n) |Omega|^(2n))
    is recognised in K; W_n = Euler(a, n) V_n, times N^(a+2-2n) - 1 when f_a = (1).
    """

    curve: str
    d: int
    a: int
    p: int
    M: int
    N: int
    trivial: bool
    pi: QuadInt
    V: dict = field(default_factory=dict)
    W: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    padic: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    def valuation(self, n: int) -> int | None:
        return frak_valuation(self.W[n], self.pi, self.p)


def padic_residue(x, p: int, M: int, d: int, seed: int | None = None) -> int | None:
    """Image of x in Z/p^M under the embedding K -> Q_p fixed by ``seed``; None if not integral there."""
    x = as_k(x)
    den = x.denominator()
    v = 0
    while den % p == 0:
        den //= p
        v += 1
    root = padic_embed_K(p, M + v, d, seed)
    num = as_k(x * den * p**v)
    img = (int(num.x) + int(num.y) * root) % p ** (M + v)
    if img % p**v:
        return None
    return img // p**v * pow(den, -1, p**M) % p**M


def critical_moments(curve: CurveData, a: int, p: int, digits: int = 60, M: int = 6, N: int = DEFAULT_N,
                     ns=None, cache=None) -> MomentFamily:
    """Build the family from L-values, Gauss sums and periods; recognition per n."""
    _check_prime(curve, p)
    pc = power_character(curve, a)
    P = complex_period(curve, digits)
    pi = prime_above(curve, p)
    fam = MomentFamily(curve.label, curve.d, a, p, M, N, pc.trivial, pi)
    tol = mpmath.mpf(10) ** (15 - digits)
    with mpmath.workdps(digits + GUARD):
        G = gauss_sum(pc).exact.embed()
        for n in ns or range(1, a + 1):
            if not 0 < n <= a:
                raise ValueError(f"n={n} is not critical for a={a}")
            z = G * _cached_l_alg(cache, curve, a, n, digits, P)
            try:
                v = recognize_in_K(z, curve.d, 10**12, tol)
            except NoRecognition as exc:
                fam.failures[n] = str(exc)
                continue
            fam.V[n] = v
            fam.residuals[n] = abs(v.to_complex() - z)
            w = euler_factors(curve, a, n, p).product * v
            if pc.trivial:
                w = w * level_factor(a, n, N)
            fam.W[n] = w
            fam.padic[n] = padic_residue(w, p, M, curve.d, curve.primes.get(p))
    return fam


def _cached_l_alg(cache, curve, a, n, digits, P):
    params = {"curve": curve.label, "a": a, "n": n}
    blob = cached(cache, "l_alg", params, digits, lambda: json.dumps(encode_mp(l_alg(curve, a, n, digits, P))))
    return decode_mp(json.loads(blob))


def moment_from_unfolding(curve: CurveData, a: int, n: int, digits: int = 60, N: int = DEFAULT_N) -> KElement:
    """The same V_n (times the level factor when f_a = (1)) read off the Eisenstein side."""
    pc = power_character(curve, a)
    if 2 * n - a <= 2:
        raise ValueError("lattice sums converge only for 2n - a > 2")
    with mpmath.workdps(digits + GUARD):
        if pc.trivial:
            z = galois_eis_sum(curve, a, n, digits, N=N)
        else:
            z = (-1) ** a * galois_eis_sum(curve, a, n, digits)
        return recognize_in_K(z, curve.d, 10**12, mpmath.mpf(10) ** (15 - digits))


@dataclass(frozen=True)
class KummerReport:
    a: int
    p: int
    m: int
    pairs: tuple
    failures: tuple
    vacuous: bool

    @property
    def passed(self) -> bool:
        return not self.failures


def kummer_battery(fam: MomentFamily, m: int = 0) -> KummerReport:
    """W_n = W_n' mod p^(m+1) at the chosen prime, for n = n' mod (p-1)p^m."""
    step = (fam.p - 1) * fam.p**m
    ns = sorted(fam.W)
    pairs, failures = [], []
    for i, n in enumerate(ns):
        for n2 in ns[i + 1:]:
            if (n2 - n) % step:
                continue
            v = frak_valuation(fam.W[n] - fam.W[n2], fam.pi, fam.p)
            pairs.append((n, n2, v))
            if v is not None and v < m + 1:
                failures.append((n, n2, v))
    missing = tuple(sorted(fam.failures))
    if missing:
        failures.extend(("unrecognized", n, None) for n in missing)
    return KummerReport(fam.a, fam.p, m, tuple(pairs), tuple(failures), not pairs)


# ------------------------------------------------------------ pseudo-measure


@dataclass(frozen=True)
class PseudoMeasure:
    """mu^a = mu'^a / mu^a_N when f_a = (1), else mu'^a itself."""

    numerator: MomentFamily
    N: int

    @property
    def a(self) -> int:
        return self.numerator.a

    def denominator_moment(self, n: int) -> Fraction:
        return level_factor(self.a, n, self.N)

    def pole_set(self, ns) -> list:
        if not self.numerator.trivial:
            return []
        return [n for n in ns if self.denominator_moment(n) == 0]


def two_point_moment(a: int, n: int, N: int = DEFAULT_N) -> Fraction:
    """Integral of x^n against N^(a+2) delta_(N^-2) - delta_1."""
    return Fraction(N) ** (a + 2) * Fraction(1, N * N) ** n - 1


def pseudo_measure_moment(pm: PseudoMeasure, n: int):
    fam = pm.numerator
    if n not in fam.W:
        raise KeyError(f"no moment at n={n}")
    if not fam.trivial:
        return fam.W[n]
    t = pm.denominator_moment(n)
    if t == 0:
        raise PoleError(f"mu^a_N has vanishing moment at n={n} (2n = a + 2)")
    return fam.W[n] / t


def two_point_kummer(a: int, N: int, p: int, m: int, ns) -> list:
    """Pairs violating the Kummer congruence for mu^a_N (expected empty)."""
    step = (p - 1) * p**m
    bad = []
    for n in ns:
        for n2 in ns:
            if n < n2 and (n2 - n) % step == 0:
                diff = two_point_moment(a, n, N) - two_point_moment(a, n2, N)
                if diff and _vp(diff, p) < m + 1:
                    bad.append((n, n2))
    return bad


def symbolic_two_point_kummer(p: int, m: int) -> bool:
    """N^(a+2) N^(-2n) - 1 minus the same at n + (p-1)p^m is divisible by N^(2(p-1)p^m) - 1."""
    a, n, N = sympy.symbols("a n N", positive=True, integer=True)
    step = (p - 1) * p**m
    t = lambda k: N ** (a + 2) * N ** (-2 * k) - 1  # noqa: E731
    diff = sympy.simplify((t(n) - t(n + step)) / (N ** (a + 2 - 2 * n - 2 * step) * (N ** (2 * step) - 1)))
    return diff == 1


def _vp(x: Fraction, p: int) -> int:
    x = Fraction(x)
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


# --------------------------------------------------- normalised p-adic value


@dataclass(frozen=True)
class NormalizedLp:
    a: int
    n: int
    p: int
    value: CyclotomicInt
    euler: EulerFactors
    gauss: CyclotomicInt
    sign: int
    level: Fraction | None


def normalized_lp(curve: CurveData, a: int, n: int, p: int, N: int = DEFAULT_N) -> NormalizedLp:
    """Euler(a,n) Gamma(n) (-1)^(a+n-1) / G(eps^a), divided by N^(a+2-2n) - 1 when f_a = (1)."""
    if n <= a:
        raise ValueError("normalized_lp is for non-critical n > a")
    pc = power_character(curve, a)
    eu = euler_factors(curve, a, n, p)
    G = gauss_sum(pc).exact
    m = gauss_order(pc)
    sign = (-1) ** (a + n - 1)
    val = embed_K(eu.product, m) * (factorial(n - 1) * sign)
    level = None
    if pc.trivial:
        level = level_factor(a, n, N)
        if level == 0:
            raise PoleError(f"pseudo-measure pole at n={n}")
        val = val / level
    return NormalizedLp(a, n, p, val / G, eu, G, sign, level)


@dataclass(frozen=True)
class RatioRoute:
    exact_agree: bool
    numeric_residual: mpmath.mpf
    recognized: KElement | None


def ratio_route(curve: CurveData, a: int, n: int, p: int, digits: int = 60, N: int = DEFAULT_N) -> RatioRoute:
    """Euler * Gamma(n) * L/Omega_inf compared with normalized_lp, exactly and numerically."""
    nl = normalized_lp(curve, a, n, p, N)
    dr = deninger_ratio(curve, a, n, digits, N)
    with mpmath.workdps(digits + GUARD):
        num = nl.euler.product.to_complex() * mpmath.factorial(n - 1) * dr.ratio
        res = abs(num - nl.value.embed()) / abs(num)
        exact = False
        rec = dr.times_gauss_in_K
        if rec is not None:
            m = gauss_order(power_character(curve, a))
            other = embed_K(nl.euler.product * rec, m) * factorial(n - 1) / nl.gauss
            exact = other == nl.value
        return RatioRoute(exact, res, rec)


# ---------------------------------------------------------- formal symbols


@dataclass(frozen=True)
class FormalPadicSymbols:
    """Omega_p^a and E_{n,a-n,phi_a}(E, omega, nu) as free symbols.

    Only the Frobenius relation sigma(Omega_p)/Omega_p = psi(p)/p is known
    about them; they are never evaluated.
    """

    Omega: sympy.Symbol = sympy.Symbol("Omega_p", nonzero=True)
    E: sympy.Symbol = sympy.Symbol("E_crit", nonzero=True)
    frobenius_relation: str = "sigma(Omega_p)/Omega_p = psi(p)/p"


@dataclass(frozen=True)
class SymbolicCheck:
    passed: bool
    ratio: sympy.Expr
    expected: sympy.Expr
    frobenius_ok: bool


def _sym(x) -> sympy.Expr:
    """K element as sympy number in Q(i sqrt(d)) using the fixed embedding."""
    x = as_k(x)
    d = x.d
    if d == 4:
        w = sympy.I
    elif d == 8:
        w = sympy.sqrt(2) * sympy.I
    else:
        w = (1 + sympy.sqrt(d) * sympy.I) / 2
    return sympy.Rational(x.x.numerator, x.x.denominator) + sympy.Rational(x.y.numerator, x.y.denominator) * w


def symbolic_cancellation(curve: CurveData, a: int, n: int, p: int, N: int = DEFAULT_N) -> SymbolicCheck:
    """L_p / Omega_p(n) with Omega_p and E formal; must reduce to normalized_lp."""
    sy = FormalPadicSymbols()
    nl = normalized_lp(curve, a, n, p, N)
    G = sympy.Symbol("G", nonzero=True)
    e1, e2 = _sym(nl.euler.first), _sym(nl.euler.second)
    level = sympy.Rational(nl.level.numerator, nl.level.denominator) if nl.level is not None else 1
    Lp = sy.Omega**a * e1 * e2 * sy.E / (G * level)
    Op = sympy.Integer(-1) ** (a - n + 1) * sy.Omega**a * sy.E / sympy.factorial(n - 1)
    ratio = sympy.simplify(Lp / Op)
    expected = e1 * e2 * sympy.factorial(n - 1) * sympy.Integer(-1) ** (a + n - 1) / (G * level)
    ok = sympy.simplify(ratio - expected) == 0 and not ({sy.Omega, sy.E} & ratio.free_symbols)
    # the Frobenius relation applied to the specialisation of p^l phi* E_{k+2,l}
    k, l = sympy.symbols("k l", integer=True)
    psi = sympy.Symbol("psi_p", nonzero=True)
    P = sympy.Symbol("p", positive=True)
    lhs = P**l * (sy.Omega * psi / P) ** (k + l + 2)
    rhs = psi ** (k + l + 2) * P ** (-k - 2) * sy.Omega ** (k + l + 2)
    frob = sympy.simplify(sympy.powsimp(sympy.expand_power_base(lhs / rhs, force=True), force=True)) == 1
    # the numeric value must agree with the exact cyclotomic one
    gval = nl.gauss.embed()
    num = complex(expected.subs(G, sympy.Float(mpmath.re(gval), 30) + sympy.I * sympy.Float(mpmath.im(gval), 30)))
    agree = abs(num - complex(nl.value.embed())) <= 1e-12 * max(1.0, abs(num))
    return SymbolicCheck(bool(ok and frob and agree), ratio, expected, bool(frob))


# ------------------------------------------------------------ main verdict


@dataclass
class MainTheoremVerdict:
    curve: str
    a: int
    n: int
    p: int
    m: int
    symbolic: bool
    complex: bool
    congruence: bool | None
    representative: int | None
    residue: int | None
    notes: list = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.symbolic and self.complex and bool(self.congruence)


def critical_representative(a: int, n: int, p: int, m: int = 0) -> int | None:
    step = (p - 1) * p**m
    reps = [k for k in range(1, a + 1) if (n - k) % step == 0]
    return reps[0] if reps else None


def verify_main_theorem(curve: CurveData, a: int, n: int, p: int, m: int = 0, digits: int = 60,
                        N: int = DEFAULT_N, family: MomentFamily | None = None) -> MainTheoremVerdict:
    """Three-part check for non-critical n > a.

    (i) the formal symbols cancel and leave normalized_lp; (ii) the complex
    ratio L/Omega_inf is the predicted element of K; (iii) n has a critical
    representative n' = n mod (p-1)p^m and the moment family passes its
    Kummer battery, so the value of the measure at n is pinned mod p^(m+1).
    The regulator injectivity hypothesis is recorded, not checked.
    """
    t0 = time.perf_counter()
    if n <= a:
        raise ValueError("main theorem concerns n > a")
    sym = symbolic_cancellation(curve, a, n, p, N)
    cr = ratio_route(curve, a, n, p, digits, N)
    tol = mpmath.mpf(10) ** (15 - digits)
    cplx = cr.exact_agree and cr.numeric_residual < tol
    v = MainTheoremVerdict(curve.label, a, n, p, m, sym.passed, cplx, None, None, None)
    v.notes.append("assumes injectivity of the p-adic regulator")
    rep = critical_representative(a, n, p, m)
    if rep is None:
        v.notes.append("no critical representative")
    else:
        v.representative = rep
        fam = family or critical_moments(curve, a, p, digits, max(m + 1, 2), N)
        rep_report = kummer_battery(fam, m)
        v.congruence = rep_report.passed and rep in fam.W
        v.residue = fam.padic.get(rep)
        if v.residue is not None:
            v.residue %= p ** (m + 1)
    v.runtime_ms = (time.perf_counter() - t0) * 1000
    return v


# ----------------------------------------------------- two-variable reindex


def two_variable_reindex(a: int, n: int) -> dict:
    """Exponents of the reindexed moment (x, y) -> (conj(f_a) x, y/f_a) at k1 = a+1-n, k2 = 1-n.

    Returns the x/y exponents and Euler-factor exponents read from the
    two-variable shape next to those of the one-variable formula.
    """
    k1, k2 = a + 1 - n, 1 - n
    two = {"x": -k2, "y": k1 - 1, "weight": k1 - k2, "first_p": 1 - k2, "second_p": k1, "s": k1}
    one = {"x": n - 1, "y": a - n, "weight": a, "first_p": n, "second_p": a + 1 - n, "s": a + 1 - n}
    return {"two_variable": two, "one_variable": one, "match": two == one}


def symbolic_reindex_check() -> bool:
    """The same identity with a, n symbolic."""
    a, n = sympy.symbols("a n", integer=True)
    k1, k2 = a + 1 - n, 1 - n
    pairs = [(-k2, n - 1), (k1 - 1, a - n), (k1 - k2, a), (1 - k2, n), (k1, a + 1 - n)]
    return all(sympy.simplify(x - y) == 0 for x, y in pairs)


def reindexed_moment(fa: QuadInt, i: int, j: int, moment: KElement) -> KElement:
    """Moment x^i y^j of f_a^-1 times the pull-back along (x, y) -> (conj(f_a) x, y/f_a)."""
    f = as_k(fa)
    return moment * f.conj() ** i / f ** (j + 1)
