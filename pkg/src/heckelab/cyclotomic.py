"""Cyclotomic integers Z[zeta_m] (with rational scalars allowed) and their
reductions modulo p^M carrying the Frobenius zeta -> zeta^p."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath
import sympy

from .fields import QuadInt, KElement, check_disc


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients of Phi_m, lowest degree first."""
    x = sympy.Symbol("x")
    return tuple(int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(m, x), x).all_coeffs()))


def euler_phi(m: int) -> int:
    return int(sympy.totient(m))


def _reduce(vec: list, m: int) -> tuple:
    """Reduce a coefficient vector (any length) modulo Phi_m."""
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    v = list(vec)
    for i in range(len(v) - 1, deg - 1, -1):
        c = v[i]
        if c:
            # Phi_m is monic: x^deg = -sum phi_j x^j
            for j in range(deg):
                if phi[j]:
                    v[i - deg + j] -= c * phi[j]
            v[i] = 0
    v = v[:deg] + [0] * (deg - len(v))
    return tuple(v)


@lru_cache(maxsize=None)
def _power_basis(m: int, e: int) -> tuple:
    vec = [0] * m
    vec[e % m] = 1
    return _reduce(vec, m)


@dataclass(frozen=True, slots=True)
class CyclotomicInt:
    """Element sum c_j zeta_m^j in the power basis j < phi(m).

    Coefficients are integers or Fractions; zeta_m is embedded in C as
    exp(2 pi i / m).
    """

    m: int
    coeffs: tuple

    @classmethod
    def from_exponents(cls, m: int, terms: dict[int, int | Fraction]) -> CyclotomicInt:
        vec = [0] * m
        for e, c in terms.items():
            vec[e % m] += c
        return cls(m, _reduce(vec, m))

    @classmethod
    def zeta(cls, m: int, e: int = 1) -> CyclotomicInt:
        return cls(m, _power_basis(m, e))

    @classmethod
    def scalar(cls, m: int, c) -> CyclotomicInt:
        deg = euler_phi(m)
        return cls(m, (c,) + (0,) * (deg - 1))

    def _coerce(self, other):
        if isinstance(other, CyclotomicInt):
            if other.m != self.m:
                raise ValueError(f"cyclotomic orders differ: {self.m} vs {other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicInt.scalar(self.m, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.m, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInt(self.m, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicInt(self.m, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prod = [0] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        return CyclotomicInt(self.m, _reduce(prod, self.m))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("use inverse() for negative powers")
        out = CyclotomicInt.scalar(self.m, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def galois(self, c: int) -> CyclotomicInt:
        """The automorphism zeta -> zeta^c (gcd(c, m) = 1)."""
        if gcd(c, self.m) != 1:
            raise ValueError(f"{c} is not a unit mod {self.m}")
        return CyclotomicInt.from_exponents(
            self.m, _accumulate((j * c, a) for j, a in enumerate(self.coeffs) if a)
        )

    def conj(self) -> CyclotomicInt:
        return self.galois(-1)

    def norm_to_q(self):
        """Absolute norm, a rational number."""
        out = CyclotomicInt.scalar(self.m, 1)
        for c in range(1, self.m):
            if gcd(c, self.m) == 1:
                out = out * self.galois(c)
        if any(out.coeffs[1:]):
            raise ArithmeticError("norm is not rational")
        return out.coeffs[0]

    def inverse(self) -> CyclotomicInt:
        """Multiplicative inverse via the product of the other conjugates."""
        rest = CyclotomicInt.scalar(self.m, 1)
        for c in range(2, self.m):
            if gcd(c, self.m) == 1:
                rest = rest * self.galois(c)
        nrm = (self * rest).coeffs[0]
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero")
        return rest * (1 / Fraction(nrm))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * self._coerce(other).inverse()

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def embed(self):
        z = mpmath.expjpi(mpmath.mpf(2) / self.m)
        out = mpmath.mpc(0)
        for j, a in enumerate(self.coeffs):
            if a:
                a = Fraction(a)
                out += (mpmath.mpf(a.numerator) / a.denominator) * z**j
        return out

    def lift(self, m2: int) -> CyclotomicInt:
        """Image in Z[zeta_{m2}] for m | m2."""
        if m2 % self.m:
            raise ValueError(f"{self.m} does not divide {m2}")
        r = m2 // self.m
        return CyclotomicInt.from_exponents(m2, _accumulate((j * r, a) for j, a in enumerate(self.coeffs) if a))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def __repr__(self):
        terms = [f"{a}*z^{j}" for j, a in enumerate(self.coeffs) if a]
        return f"Cyc{self.m}(" + (" + ".join(terms) or "0") + ")"


def _accumulate(pairs) -> dict:
    out: dict = {}
    for e, c in pairs:
        out[e] = out.get(e, 0) + c
    return out


def field_root_order(d: int) -> int:
    """Smallest m with K inside Q(zeta_m): the conductor of K."""
    check_disc(d)
    return d


def embed_K(q: QuadInt | KElement, m: int) -> CyclotomicInt:
    """Image of x + y*w in Q(zeta_m); requires d_K | m.

    The embedding agrees with the fixed complex embedding of K.
    """
    d = q.d
    if m % field_root_order(d):
        raise ValueError(f"Q(sqrt(-{d})) does not embed in Q(zeta_{m})")
    sq = sqrt_minus_d_cyc(d, m)
    # w = sqrt(-d)/2 (d = 4, 8), (1 + sqrt(-d))/2 (odd d)
    if d in (4, 8):
        w = sq * Fraction(1, 2)
    else:
        w = (sq + 1) * Fraction(1, 2)
    return CyclotomicInt.scalar(m, q.x) + w * q.y if q.y else CyclotomicInt.scalar(m, q.x)


@lru_cache(maxsize=None)
def sqrt_minus_d_cyc(d: int, m: int) -> CyclotomicInt:
    if d == 4:
        return CyclotomicInt.zeta(m, m // 4) * 2
    if d == 8:
        z = m // 8
        return CyclotomicInt.from_exponents(m, {z: 2, 3 * z: 2})
    # quadratic Gauss sum for the prime d = 3 mod 4
    r = m // d
    terms = {}
    for k in range(1, d):
        leg = pow(k, (d - 1) // 2, d)
        terms[k * r] = 1 if leg == 1 else -1
    return CyclotomicInt.from_exponents(m, terms)


@dataclass(frozen=True, slots=True)
class PadicCyclotomic:
    """Element of Z_p[zeta_m] reduced modulo p^M, p prime to m."""

    p: int
    M: int
    value: CyclotomicInt

    def __post_init__(self):
        if self.value.m % self.p == 0:
            raise ValueError(f"p={self.p} divides m={self.value.m}")
        mod = self.p**self.M
        object.__setattr__(
            self,
            "value",
            CyclotomicInt(self.value.m, tuple(_reduce_frac(c, self.p, mod) for c in self.value.coeffs)),
        )

    @property
    def m(self) -> int:
        return self.value.m

    def _coerce(self, other):
        if isinstance(other, PadicCyclotomic):
            if (other.p, other.M, other.m) != (self.p, self.M, self.m):
                raise ValueError("incompatible p-adic cyclotomic rings")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicCyclotomic(self.p, self.M, CyclotomicInt.scalar(self.m, other))
        if isinstance(other, CyclotomicInt):
            return PadicCyclotomic(self.p, self.M, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicCyclotomic(self.p, self.M, self.value + o.value)

    __radd__ = __add__

    def __neg__(self):
        return PadicCyclotomic(self.p, self.M, -self.value)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicCyclotomic(self.p, self.M, self.value - o.value)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicCyclotomic(self.p, self.M, self.value * o.value)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.value.coeffs)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.value == o.value

    def __hash__(self):
        return hash((self.p, self.M, self.value))


def _reduce_frac(c, p: int, mod: int) -> int:
    c = Fraction(c)
    if c.denominator % p == 0:
        raise ValueError(f"coefficient {c} is not p-integral for p={p}")
    return c.numerator * pow(c.denominator, -1, mod) % mod


def multiplicative_order(a: int, m: int) -> int:
    if gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    k, x = 1, a % m
    while x != 1 % m:
        x = x * a % m
        k += 1
    return k


def frobenius_sigma(c: PadicCyclotomic) -> PadicCyclotomic:
    """zeta_m -> zeta_m^p, extended linearly."""
    if c.m % c.p == 0:
        raise ValueError(f"p={c.p} divides m={c.m}")
    return PadicCyclotomic(c.p, c.M, c.value.galois(c.p))
