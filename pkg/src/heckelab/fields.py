"""Exact arithmetic in the maximal orders of the nine imaginary quadratic
fields of class number one.

Elements are written ``x + y*w`` where ``w`` is the standard generator of
the ring of integers: ``i`` for d=4, ``sqrt(-2)`` for d=8 and
``(1 + sqrt(-d))/2`` for odd d.  Fields are identified by ``d = d_K``
(the absolute value of the discriminant).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from numbers import Rational

import mpmath

CLASS_NUMBER_ONE = (3, 4, 7, 8, 11, 19, 43, 67, 163)


class FieldError(ValueError):
    pass


class NoRecognition(ArithmeticError):
    pass


def check_disc(d: int) -> int:
    if d not in CLASS_NUMBER_ONE:
        raise FieldError(f"d_K={d} is not a class-number-one discriminant")
    return d


@lru_cache(maxsize=None)
def omega_trace_norm(d: int) -> tuple[int, int]:
    """Trace and norm of the generator w, so that w^2 = t*w - n."""
    check_disc(d)
    if d == 4:
        return 0, 1
    if d == 8:
        return 0, 2
    return 1, (1 + d) // 4


def omega_complex(d: int):
    """The fixed complex embedding of w (imaginary part positive)."""
    if d == 4:
        return mpmath.mpc(0, 1)
    if d == 8:
        return mpmath.mpc(0, mpmath.sqrt(2))
    return mpmath.mpc(mpmath.mpf(1) / 2, mpmath.sqrt(d) / 2)


class _QuadArith:
    """Shared arithmetic for ``x + y*w``; subclasses fix the coordinate type."""

    __slots__ = ()
    x: Rational
    y: Rational
    d: int

    def _coerce(self, other):
        if isinstance(other, _QuadArith):
            if other.d != self.d:
                raise FieldError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return _make(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _make(self.x + o.x, self.y + o.y, self.d)

    __radd__ = __add__

    def __neg__(self):
        return _make(-self.x, -self.y, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _make(self.x - o.x, self.y - o.y, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t, n = omega_trace_norm(self.d)
        x1, y1, x2, y2 = self.x, self.y, o.x, o.y
        return _make(x1 * x2 - n * y1 * y2, x1 * y2 + x2 * y1 + t * y1 * y2, self.d)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return KElement(1, 0, self.d) / self ** (-e)
        result = _make(1, 0, self.d)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        nrm = o.norm()
        if nrm == 0:
            raise ZeroDivisionError("division by zero in K")
        num = self * o.conj()
        return KElement(Fraction(num.x) / nrm, Fraction(num.y) / nrm, self.d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def conj(self):
        t, _ = omega_trace_norm(self.d)
        return _make(self.x + t * self.y, -self.y, self.d)

    def norm(self):
        t, n = omega_trace_norm(self.d)
        return self.x * self.x + t * self.x * self.y + n * self.y * self.y

    def trace(self):
        t, _ = omega_trace_norm(self.d)
        return 2 * self.x + t * self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def to_complex(self):
        x, y = Fraction(self.x), Fraction(self.y)
        return mpmath.mpf(x.numerator) / x.denominator + (
            mpmath.mpf(y.numerator) / y.denominator
        ) * omega_complex(self.d)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.x == o.x and self.y == o.y and self.d == o.d

    def __hash__(self):
        return hash((Fraction(self.x), Fraction(self.y), self.d))

    def __bool__(self):
        return not self.is_zero()


@dataclass(frozen=True, eq=False, slots=True)
class QuadInt(_QuadArith):
    """Element of O_K."""

    x: int
    y: int
    d: int

    def __post_init__(self):
        if not (isinstance(self.x, int) and isinstance(self.y, int)):
            raise TypeError("QuadInt coordinates must be integers")

    def divides(self, other: QuadInt) -> bool:
        if self.is_zero():
            return other.is_zero()
        q = other / self
        return q.is_integral()

    def exact_div(self, other: QuadInt) -> QuadInt:
        q = self / other
        if not q.is_integral():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q.to_int()

    def __repr__(self):
        return f"QuadInt({self.x}, {self.y}, d={self.d})"

    def __str__(self):
        return _fmt(self)


@dataclass(frozen=True, eq=False, slots=True)
class KElement(_QuadArith):
    """Element of K with rational coordinates."""

    x: Fraction
    y: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    def is_integral(self) -> bool:
        # x + y*w is integral iff trace and norm are integers
        return self.trace().denominator == 1 and self.norm().denominator == 1 and (
            self.x.denominator == 1 and self.y.denominator == 1
        )

    def to_int(self) -> QuadInt:
        if not self.is_integral():
            raise ArithmeticError(f"{self} is not in O_K")
        return QuadInt(int(self.x), int(self.y), self.d)

    def denominator(self) -> int:
        return self.x.denominator * self.y.denominator // gcd(self.x.denominator, self.y.denominator)

    def __repr__(self):
        return f"KElement({self.x}, {self.y}, d={self.d})"

    def __str__(self):
        return _fmt(self)


def _make(x, y, d):
    if isinstance(x, int) and isinstance(y, int):
        return QuadInt(x, y, d)
    x, y = Fraction(x), Fraction(y)
    if x.denominator == 1 and y.denominator == 1:
        return QuadInt(int(x), int(y), d)
    return KElement(x, y, d)


def _fmt(q) -> str:
    return f"({q.x})+({q.y})w[{q.d}]"


def as_k(q) -> KElement:
    return KElement(Fraction(q.x), Fraction(q.y), q.d)


def sqrt_minus_d(d: int) -> QuadInt:
    """sqrt(-d_K) in the basis (1, w), matching the fixed complex embedding."""
    check_disc(d)
    if d == 4:
        return QuadInt(0, 2, d)
    if d == 8:
        return QuadInt(0, 2, d)
    return QuadInt(-1, 2, d)


@lru_cache(maxsize=None)
def units(d: int) -> tuple[QuadInt, ...]:
    check_disc(d)
    if d == 4:
        return (QuadInt(1, 0, 4), QuadInt(0, 1, 4), QuadInt(-1, 0, 4), QuadInt(0, -1, 4))
    if d == 3:
        w = QuadInt(0, 1, 3)  # exp(i*pi/3), a primitive 6th root of unity
        out, u = [], QuadInt(1, 0, 3)
        for _ in range(6):
            out.append(u)
            u = u * w
        return tuple(out)
    return (QuadInt(1, 0, d), QuadInt(-1, 0, d))


def unit_count(d: int) -> int:
    return len(units(d))


def unit_root_index(u: QuadInt) -> int:
    """k such that u = zeta^k for the generator zeta = units(d)[1]."""
    us = units(u.d)
    for k, v in enumerate(us):
        if v == u:
            return k
    raise FieldError(f"{u} is not a unit")


def elements_of_norm(n: int, d: int) -> list[QuadInt]:
    """All elements of O_K with norm exactly n."""
    t, m = omega_trace_norm(d)
    out = []
    # N(x + y w) = (x + t y/2)^2 + (m - t^2/4) y^2 ; disc = 4m - t^2 = d
    ymax = isqrt(4 * n // d) + 1
    for y in range(-ymax, ymax + 1):
        # 4N = (2x + t y)^2 + d y^2
        rest = 4 * n - d * y * y
        if rest < 0:
            continue
        r = isqrt(rest)
        if r * r != rest:
            continue
        for s in {r, -r}:
            if (s - t * y) % 2 == 0:
                out.append(QuadInt((s - t * y) // 2, y, d))
    return out


def elements_up_to_norm(bound: int, d: int):
    """Yield (norm, element) for all nonzero elements with norm <= bound, sorted by norm."""
    t, _ = omega_trace_norm(d)
    items = []
    ymax = isqrt(4 * bound // d) + 1
    for y in range(-ymax, ymax + 1):
        rest = 4 * bound - d * y * y
        if rest < 0:
            continue
        r = isqrt(rest)
        # |2x + t y| <= r
        lo = -((r + t * y) // 2) - 1
        hi = (r - t * y) // 2 + 1
        for x in range(lo, hi + 1):
            q = QuadInt(x, y, d)
            nq = q.norm()
            if 0 < nq <= bound:
                items.append((nq, q))
    items.sort(key=lambda it: (it[0], it[1].x, it[1].y))
    return items


def associates_class(q: QuadInt) -> QuadInt:
    """Canonical generator of the ideal (q): the lexicographically largest associate."""
    return max((u * q for u in units(q.d)), key=lambda v: (v.x, v.y))


def prime_factorisation_ideals(n: int, d: int) -> list[QuadInt]:
    """Generators (canonical) of the prime ideals above the rational prime n."""
    gens = {associates_class(q) for q in elements_of_norm(n, d)}
    if gens:
        return sorted(gens, key=lambda v: (v.x, v.y))
    return [QuadInt(n, 0, d)]


def splitting_type(p: int, d: int) -> str:
    """'split', 'inert' or 'ramified' for a rational prime p."""
    if d % p == 0 or (d in (4, 8) and p == 2):
        return "ramified"
    if p == 2:
        # d odd: 2 splits iff d = 7 mod 8
        return "split" if d % 8 == 7 else "inert"
    return "split" if pow(-d % p, (p - 1) // 2, p) == 1 else "inert"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------- residues


def _hnf(modulus: QuadInt) -> tuple[int, int, int]:
    """Hermite normal form (h1, c, h2) of the ideal lattice (modulus).

    The lattice is spanned by (h1, 0) and (c, h2) in (1, w) coordinates,
    with 0 <= c < h1 and h1*h2 = N(modulus).
    """
    d = modulus.d
    w = QuadInt(0, 1, d)
    b1, b2 = modulus, modulus * w
    # column echelon on the y coordinate
    a, b = (b1.x, b1.y), (b2.x, b2.y)
    while b[1] != 0:
        q = a[1] // b[1]
        a, b = b, (a[0] - q * b[0], a[1] - q * b[1])
    if a[1] < 0:
        a = (-a[0], -a[1])
    h2 = a[1]
    # b is now (something, 0); the x-only generator
    h1 = abs(b[0])
    if h1 == 0:
        raise FieldError("degenerate ideal lattice")
    c = a[0] % h1
    assert h1 * h2 == modulus.norm()
    return h1, c, h2


@lru_cache(maxsize=4096)
def _hnf_cached(x, y, d):
    return _hnf(QuadInt(x, y, d))


def reduce_mod(q: QuadInt, modulus: QuadInt) -> QuadInt:
    """Canonical representative of q modulo the ideal (modulus)."""
    if modulus.is_zero():
        raise FieldError("zero modulus")
    h1, c, h2 = _hnf_cached(modulus.x, modulus.y, modulus.d)
    k = q.y // h2
    x = q.x - k * c
    y = q.y - k * h2
    return QuadInt(x % h1, y, q.d)


@dataclass(frozen=True, slots=True)
class ResidueClass:
    rep: QuadInt
    modulus: QuadInt

    def __post_init__(self):
        object.__setattr__(self, "rep", reduce_mod(self.rep, self.modulus))

    def __mul__(self, other: ResidueClass) -> ResidueClass:
        self._check(other)
        return ResidueClass(self.rep * other.rep, self.modulus)

    def __add__(self, other: ResidueClass) -> ResidueClass:
        self._check(other)
        return ResidueClass(self.rep + other.rep, self.modulus)

    def _check(self, other):
        if not associates(self.modulus, other.modulus):
            raise FieldError("residue classes modulo different ideals")

    def is_unit(self) -> bool:
        return ideal_gcd_is_one(self.rep, self.modulus)

    def inverse(self) -> ResidueClass:
        for r in all_residues(self.modulus):
            if (r * self.rep - 1).is_zero() or self.modulus.divides(r * self.rep - 1):
                return ResidueClass(r, self.modulus)
        raise ZeroDivisionError(f"{self.rep} is not invertible mod {self.modulus}")


def associates(a: QuadInt, b: QuadInt) -> bool:
    return any(u * a == b for u in units(a.d))


@lru_cache(maxsize=256)
def _all_residues(x, y, d) -> tuple[QuadInt, ...]:
    h1, c, h2 = _hnf(QuadInt(x, y, d))
    return tuple(QuadInt(a, b, d) for b in range(h2) for a in range(h1))


def all_residues(modulus: QuadInt) -> tuple[QuadInt, ...]:
    if modulus.is_zero():
        raise FieldError("zero modulus")
    return _all_residues(modulus.x, modulus.y, modulus.d)


def ideal_gcd_is_one(a: QuadInt, modulus: QuadInt) -> bool:
    """True iff (a) + (modulus) = O_K, i.e. a is a unit modulo the modulus."""
    if modulus.norm() == 1:
        return True
    # (a, m) = 1 iff a is invertible in O_K/m iff norm of gcd is 1; test via a
    # common prime divisor of the norms
    g = gcd(a.norm(), modulus.norm())
    if g == 1:
        return True
    n = g
    p = 2
    while n > 1:
        if n % p == 0:
            for pi in prime_factorisation_ideals(p, a.d):
                if pi.divides(a) and pi.divides(modulus):
                    return False
            while n % p == 0:
                n //= p
        p += 1
    return True


def residue_unit_group(modulus: QuadInt) -> list[ResidueClass]:
    """One representative per class of (O_K/modulus)^x."""
    if modulus.is_zero():
        raise FieldError("zero modulus")
    return [ResidueClass(r, modulus) for r in all_residues(modulus) if ideal_gcd_is_one(r, modulus)]


def divisors(f: QuadInt) -> list[QuadInt]:
    """Canonical generators of all ideal divisors of (f)."""
    n = f.norm()
    out = set()
    for m in range(1, n + 1):
        if n % m:
            continue
        for g in elements_of_norm(m, f.d):
            if g.divides(f):
                out.add(associates_class(g))
    return sorted(out, key=lambda g: (g.norm(), g.x, g.y))


# ------------------------------------------------------------ recognition


def _to_fraction(x: mpmath.mpf) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if not man:
        return Fraction(0)
    return (-1) ** sign * Fraction(int(man)) * Fraction(2) ** int(exp)


def recognize_rational(x, denom_bound: int, tol) -> Fraction:
    """Best continued-fraction approximation with denominator <= bound, residual-checked."""
    fx = _to_fraction(mpmath.mpf(x))
    cand = fx.limit_denominator(denom_bound)
    if abs(mpmath.mpf(cand.numerator) / cand.denominator - x) >= tol:
        raise NoRecognition(f"no rational with denominator <= {denom_bound} within {tol}")
    return cand


def recognize_in_K(z, d: int, denom_bound: int, tol) -> KElement:
    """Recognise a high-precision complex number as x + y*w with small denominators.

    Real and imaginary parts are handled separately; the imaginary part
    fixes y, the real part then fixes x.
    """
    check_disc(d)
    z = mpmath.mpc(z)
    w = omega_complex(d)
    y_val = z.imag / w.imag
    # half-integral denominators arise from w = (1 + sqrt(-d))/2
    y = recognize_rational(y_val, denom_bound, tol / 4)
    x_val = z.real - (mpmath.mpf(y.numerator) / y.denominator) * w.real
    x = recognize_rational(x_val, denom_bound, tol / 4)
    out = KElement(x, y, d)
    if abs(out.to_complex() - z) >= tol:
        raise NoRecognition("residual check failed after recognition")
    return out


# ---------------------------------------------------------------- p-adic


def _minpoly(d: int) -> tuple[int, int]:
    t, n = omega_trace_norm(d)
    return t, n  # X^2 - t X + n


def hensel_roots_mod_p(p: int, d: int) -> list[int]:
    t, n = _minpoly(d)
    return [r for r in range(p) if (r * r - t * r + n) % p == 0]


def padic_embed_K(p: int, M: int, d: int, seed: int | None = None) -> int:
    """Root of the minimal polynomial of w modulo p^M.

    ``seed`` is the root modulo p selecting the prime above p; by default
    the smallest root is used.
    """
    check_disc(d)
    if splitting_type(p, d) != "split":
        raise FieldError(f"p={p} is {splitting_type(p, d)} in Q(sqrt(-{d}))")
    roots = hensel_roots_mod_p(p, d)
    r = roots[0] if seed is None else seed % p
    if r not in roots:
        raise FieldError(f"seed {seed} is not a root of the minimal polynomial mod {p}")
    t, n = _minpoly(d)
    mod = p
    for _ in range(1, M):
        mod *= p
        fr = r * r - t * r + n
        dfr = 2 * r - t
        r = (r - fr * pow(dfr, -1, mod)) % mod
    assert (r * r - t * r + n) % p**M == 0
    return r


def padic_image(q, p: int, M: int, root: int) -> Fraction:
    """Image of an element of K in Q (as a rational p-adic approximation).

    The result agrees with the p-adic image modulo p^(M - v) where v is the
    p-adic valuation of the denominators of q.
    """
    return Fraction(q.x) + Fraction(q.y) * (root % p**M)


def vp(x: Fraction | int, p: int) -> float:
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, dd = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while dd % p == 0:
        dd //= p
        v -= 1
    return v
