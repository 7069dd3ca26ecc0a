"""Level-N Eisenstein q-expansions, the operators d/dlog q and phi*, and the
p-adic family E^(p)_{k+2,l} with its syntomic section.

Exponents live on the grid (1/N)Z: coefficient ``coeffs[e]`` belongs to
q^(e/N) = q_N^e.  Labels follow the moment convention: E^(p)_{k+2,l} is the
x^(k+1) y^l moment, and d/dlog q sends the label (k+2, l) to (k+3, l+1).

For rho = (r tau + t)/N on the lattice Z + Z tau the normalised series is
E^inf_{K,0,rho} / (2 pi i)^K, K = k + 2, with

    -B_K({-r/N})/K + sum_{m d = e} [(-1)^K [d = r] z^(tm) + [d = -r] z^(-tm)] (d/N)^(K-1) q_N^e

(d taken mod N, z = zeta_N).  The Fourier oracle below checks this.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd

import mpmath

from .cyclotomic import CyclotomicInt, PadicCyclotomic, frobenius_sigma
from .lattice import GUARD, Lattice, eis_infty

DEFAULT_Q = 50
DEFAULT_M = 6


class NormalizationError(AssertionError):
    """Exact q-expansion disagrees with the lattice-sum oracle."""


class DepthError(ValueError):
    """Negative twist needs a deeper stabilisation than requested."""


@dataclass(frozen=True)
class QExpansion:
    """Truncated series sum_{e < order} c_e q^(e/N).

    ``ring`` is "exact" (CyclotomicInt coefficients, rational scalars allowed)
    or "padic" (PadicCyclotomic modulo p^M).
    """

    N: int
    coeffs: tuple
    ring: str = "exact"
    p: int | None = None
    M: int | None = None
    label: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.ring not in ("exact", "padic"):
            raise ValueError(f"unknown coefficient ring {self.ring!r}")
        if self.ring == "padic" and (self.p is None or self.M is None):
            raise ValueError("p-adic series need p and M")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def zero_coeff(self):
        z = CyclotomicInt.scalar(self.N, 0)
        return z if self.ring == "exact" else PadicCyclotomic(self.p, self.M, z)

    def _like(self, coeffs, label=None) -> QExpansion:
        return QExpansion(self.N, tuple(coeffs), self.ring, self.p, self.M, label)

    def _check(self, other: QExpansion):
        if (self.N, self.ring, self.p, self.M) != (other.N, other.ring, other.p, other.M):
            raise ValueError("q-expansions live in different rings")

    def __add__(self, other: QExpansion) -> QExpansion:
        self._check(other)
        n = min(self.order, other.order)
        return self._like(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    def __neg__(self) -> QExpansion:
        return self._like(-c for c in self.coeffs)

    def __sub__(self, other: QExpansion) -> QExpansion:
        return self + (-other)

    def scale(self, c) -> QExpansion:
        """Multiply every coefficient by an int, Fraction or ring element."""
        if self.ring == "padic" and isinstance(c, Fraction):
            c = PadicCyclotomic(self.p, self.M, CyclotomicInt.scalar(self.N, c))
        return self._like(x * c for x in self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            return self.scale(other)
        self._check(other)
        n = min(self.order, other.order)
        out = [self.zero_coeff() for _ in range(n)]
        for i in range(n):
            a = self.coeffs[i]
            if _is_zero(a):
                continue
            for j in range(n - i):
                b = other.coeffs[j]
                if not _is_zero(b):
                    out[i + j] = out[i + j] + a * b
        return self._like(out)

    __rmul__ = scale

    def truncate(self, order: int) -> QExpansion:
        return self._like(self.coeffs[:order], self.label)

    def to_padic(self, p: int, M: int) -> QExpansion:
        if self.ring == "padic":
            if (p, M) != (self.p, self.M):
                raise ValueError("already reduced at a different (p, M)")
            return self
        if self.N % p == 0:
            raise ValueError(f"p={p} divides the level {self.N}")
        return QExpansion(self.N, tuple(PadicCyclotomic(p, M, c) for c in self.coeffs), "padic", p, M, self.label)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coeffs)

    def descends_to_Q(self) -> bool:
        """True when every coefficient is rational (exact ring only)."""
        if self.ring != "exact":
            raise ValueError("rationality is only meaningful for exact series")
        return all(c.is_rational() for c in self.coeffs)

    def evaluate(self, tau, dps: int = 30):
        """Numerical value at tau (exact ring), q_N = exp(2 pi i tau / N)."""
        if self.ring != "exact":
            raise ValueError("only exact series can be evaluated in C")
        with mpmath.workdps(dps):
            qN = mpmath.exp(2j * mpmath.pi * mpmath.mpc(tau) / self.N)
            return sum((c.embed() * qN**e for e, c in enumerate(self.coeffs)), mpmath.mpc(0))

    def first_difference(self, other: QExpansion):
        """Smallest exponent index where the two series differ, or None."""
        self._check(other)
        for e, (a, b) in enumerate(zip(self.coeffs, other.coeffs)):
            if a != b:
                return e
        return None

    # canonical text form used by the cache
    def to_text(self) -> str:
        return json.dumps(
            {
                "N": self.N,
                "ring": self.ring,
                "p": self.p,
                "M": self.M,
                "label": list(self.label) if self.label else None,
                "coeffs": [[str(Fraction(x)) for x in _raw(c)] for c in self.coeffs],
            },
            sort_keys=True,
        )

    @classmethod
    def from_text(cls, text: str) -> QExpansion:
        obj = json.loads(text)
        N, ring = obj["N"], obj["ring"]
        cs = []
        for vec in obj["coeffs"]:
            v = tuple(_parse_num(x) for x in vec)
            c = CyclotomicInt(N, v)
            cs.append(c if ring == "exact" else PadicCyclotomic(obj["p"], obj["M"], c))
        label = tuple(obj["label"]) if obj["label"] else None
        return cls(N, tuple(cs), ring, obj["p"], obj["M"], label)


def _is_zero(c) -> bool:
    return not any(_raw(c))


def _raw(c) -> tuple:
    return c.value.coeffs if isinstance(c, PadicCyclotomic) else c.coeffs


def _parse_num(s: str):
    f = Fraction(s)
    return f.numerator if f.denominator == 1 else f


# ------------------------------------------------------------------ operators


def dlogq(f: QExpansion) -> QExpansion:
    """q d/dq: the coefficient of q^(e/N) is multiplied by e/N."""
    label = (f.label[0] + 1, f.label[1] + 1) if f.label else None
    return f._like((c * Fraction(e, f.N) if e else f.zero_coeff() for e, c in enumerate(f.coeffs)), label)


def frobenius_phistar(f: QExpansion, p: int | None = None, order: int | None = None) -> QExpansion:
    """phi* = (q -> q^p) tensor sigma, sigma(zeta_N) = zeta_N^p.

    The image of a series known below exponent Q is known below pQ; asking
    for more returns the series cut at that reduced valid order.
    """
    if f.ring == "padic":
        if p is not None and p != f.p:
            raise ValueError("p differs from the coefficient ring")
        p = f.p
        sigma = frobenius_sigma
    else:
        if p is None:
            raise ValueError("exact series need an explicit p for phi*")
        sigma = lambda c: c.galois(p)  # noqa: E731
    if gcd(p, f.N) != 1:
        raise ValueError(f"p={p} divides the level {f.N}")
    order = f.order if order is None else min(order, p * f.order)
    out = [f.zero_coeff() for _ in range(order)]
    for e in range(0, order, p):
        out[e] = sigma(f.coeffs[e // p])
    return f._like(out)


def removal_operator(f: QExpansion, l: int, p: int | None = None) -> QExpansion:
    """(1 - p^l phi*) f."""
    return f - frobenius_phistar(f, p).scale(Fraction(p or f.p) ** l)


# --------------------------------------------------------- Eisenstein series


def _check_label(rho, N: int) -> tuple[int, int]:
    if N < 3:
        raise ValueError("level N must be at least 3")
    r, t = rho[0] % N, rho[1] % N
    if (r, t) == (0, 0):
        raise ValueError("rho must be a nonzero N-torsion label")
    return r, t


def _constant_term(K: int, r: int, N: int) -> Fraction:
    x = Fraction((-r) % N, N)
    return -_bernoulli_poly(K, x) / K


def _bernoulli_poly(n: int, x: Fraction) -> Fraction:
    import sympy

    return Fraction(str(sympy.bernoulli(n, sympy.Rational(x.numerator, x.denominator))))


def _divisor_terms(e: int, r: int, N: int, p: int | None = None):
    """(m, dtilde, family) with m * dtilde = e; family +1 for dtilde = r, -1 for dtilde = -r mod N.

    With ``p`` given, terms with p | m are dropped (the effect of 1 - phi*).
    """
    for m in range(1, e + 1):
        if e % m or (p is not None and m % p == 0):
            continue
        dt = e // m
        if (dt - r) % N == 0:
            yield m, dt, 1
        if (dt + r) % N == 0:
            yield m, dt, -1


def eisenstein_qexp(k: int, rho, Q: int = DEFAULT_Q, N: int = 8) -> QExpansion:
    """Exact q-expansion of E_{k+2,0,rho} / (2 pi i)^(k+2), rho = (r tau + t)/N."""
    if k < 1:
        raise ValueError("k must be at least 1")
    r, t = _check_label(rho, N)
    K = k + 2
    coeffs = [CyclotomicInt.scalar(N, _constant_term(K, r, N))]
    sign = (-1) ** K
    for e in range(1, Q):
        terms: dict = {}
        for m, dt, fam in _divisor_terms(e, r, N):
            val = Fraction(dt, N) ** (K - 1)
            ex = fam * t * m
            terms[ex % N] = terms.get(ex % N, 0) + (sign * val if fam == 1 else val)
        coeffs.append(CyclotomicInt.from_exponents(N, terms))
    return QExpansion(N, tuple(coeffs), label=(k + 2, 0))


def eisenstein_divisor(k: int, phi: dict, Q: int = DEFAULT_Q, N: int = 8) -> QExpansion:
    """E_{k+2,0,phi} for a divisor phi = {rho: multiplicity}."""
    out = None
    for rho, mult in phi.items():
        term = eisenstein_qexp(k, rho, Q, N).scale(mult)
        out = term if out is None else out + term
    if out is None:
        raise ValueError("empty divisor")
    return QExpansion(N, out.coeffs, label=(k + 2, 0))


def galois_label(rho, c: int, N: int) -> tuple[int, int]:
    """Label hit by zeta_N -> zeta_N^c: (r, t) -> (r, c t)."""
    if gcd(c, N) != 1:
        raise ValueError(f"{c} is not a unit mod {N}")
    return rho[0] % N, (c * rho[1]) % N


def galois_qexp(f: QExpansion, c: int) -> QExpansion:
    if f.ring != "exact":
        raise ValueError("Galois action is applied to exact series")
    return f._like((x.galois(c) for x in f.coeffs), f.label)


# ------------------------------------------------------------ Fourier oracle


@dataclass(frozen=True)
class OracleResult:
    k: int
    rho: tuple
    N: int
    coefficients: tuple
    residual: mpmath.mpf
    first_bad: int | None


def oracle_samples(n_coeffs: int, N: int = 8, digits: int = 60, im_tau=mpmath.mpf(3) / 2) -> int:
    """Sample count J whose aliasing error R^(J - e) on the e-th coefficient is below 10^-(digits+5)."""
    decay = 2 * float(mpmath.pi) * float(im_tau) / N
    return max(4 * n_coeffs, n_coeffs + math.ceil((digits + 5) * math.log(10) / decay))


def fourier_coefficients(k: int, rho, n_coeffs: int = 40, N: int = 8, digits: int = 60,
                         im_tau=mpmath.mpf(3) / 2, samples: int | None = None):
    """Numerical q_N-coefficients of E^inf_{k+2,0,rho}/(2 pi i)^(k+2) by discrete
    Fourier inversion over ``samples`` points on the circle |q_N| = exp(-2 pi Im(tau)/N).
    """
    r, t = _check_label(rho, N)
    J = samples or oracle_samples(n_coeffs, N, digits, im_tau)
    with mpmath.workdps(digits + GUARD):
        y = mpmath.mpf(im_tau)
        R = mpmath.exp(-2 * mpmath.pi * y / N)
        norm = (2j * mpmath.pi) ** (k + 2)
        vals = []
        for j in range(J):
            tau = mpmath.mpc(mpmath.mpf(N) * j / J, y)
            lat = Lattice.tau(tau)
            vals.append(eis_infty(k, 0, (r * tau + t) / N, lat, digits) / norm)
        out = []
        for e in range(n_coeffs):
            s = mpmath.fsum(v * mpmath.expjpi(-mpmath.mpf(2 * e * j) / J) for j, v in enumerate(vals))
            out.append(s / J / R**e)
        return out


def oracle_check(k: int, rho, n_coeffs: int = 40, N: int = 8, digits: int = 60, tol=None) -> OracleResult:
    """Compare the exact expansion with the Fourier oracle; raises NormalizationError on mismatch."""
    tol = mpmath.mpf(10) ** -30 if tol is None else tol
    exact = eisenstein_qexp(k, rho, n_coeffs, N)
    num = fourier_coefficients(k, rho, n_coeffs, N, digits)
    worst, bad = mpmath.mpf(0), None
    with mpmath.workdps(digits + GUARD):
        for e, (c, v) in enumerate(zip(exact.coeffs, num)):
            err = abs(c.embed() - v)
            if err > worst:
                worst = err
            if err > tol and bad is None:
                bad = e
    res = OracleResult(k, tuple(rho), N, tuple(num), worst, bad)
    if bad is not None:
        raise NormalizationError(f"coefficient {bad} of E_{k + 2},0,{tuple(rho)} off by {mpmath.nstr(worst, 5)}")
    return res


def pointwise_check(k: int, rho, taus, N: int = 8, digits: int = 40, Q: int = 400):
    """Max |series(tau) - lattice value| over sample points."""
    r, t = _check_label(rho, N)
    f = eisenstein_qexp(k, rho, Q, N)
    worst = mpmath.mpf(0)
    with mpmath.workdps(digits + GUARD):
        for tau in taus:
            tau = mpmath.mpc(tau)
            lat = Lattice.tau(tau)
            ref = eis_infty(k, 0, (r * tau + t) / N, lat, digits) / (2j * mpmath.pi) ** (k + 2)
            worst = max(worst, abs(f.evaluate(tau, digits + GUARD) - ref))
    return worst


# ------------------------------------------------------------- p-adic family


def _padic_coeff(N: int, p: int, M: int, terms: dict) -> PadicCyclotomic:
    vec = [0] * N
    for ex, c in terms.items():
        vec[ex % N] += c
    return PadicCyclotomic(p, M, CyclotomicInt.from_exponents(N, {i: c for i, c in enumerate(vec) if c}))


def _phi_items(phi, N):
    if isinstance(phi, tuple):
        phi = {phi: 1}
    return [(_check_label(rho, N), mult) for rho, mult in phi.items()]


def eis_p_measure(k: int, l: int, phi, Q: int, p: int, M: int, N: int = 8) -> QExpansion:
    """E^(p)_{k+2,l,phi} mod p^M as the x^(k+1) y^l moment.

    Each coefficient is a sum of point masses: weight -zeta^(tm) at
    (x, y) = (-d, -m) and zeta^(-tm) at (d, m), d = dtilde/N, p not dividing m.
    Negative l uses the inverse of m modulo p^M.
    """
    if k < -1:
        raise ValueError("k must be at least -1")
    if N % p == 0:
        raise ValueError(f"p={p} divides N={N}")
    mod = p**M
    ninv = pow(N, -1, mod)
    items = _phi_items(phi, N)
    sign = -1 if (k + l) % 2 else 1
    coeffs = [_padic_coeff(N, p, M, {})]
    for e in range(1, Q):
        terms: dict = {}
        for (r, t), mult in items:
            for m, dt, fam in _divisor_terms(e, r, N, p):
                val = mult * pow(dt * ninv, k + 1, mod) * pow(m, l, mod)
                ex = (fam * t * m) % N
                terms[ex] = terms.get(ex, 0) + (sign * val if fam == 1 else val)
        coeffs.append(_padic_coeff(N, p, M, terms))
    return QExpansion(N, tuple(coeffs), "padic", p, M, (k + 2, l))


def eis_p_exact(k: int, l: int, phi, Q: int, p: int, N: int = 8) -> QExpansion:
    """Exact E^(p)_{k+2,l,phi} for l >= 0 (coefficients in Z[1/N][zeta_N])."""
    if l < 0:
        raise ValueError("exact series need l >= 0; use eis_p for negative twists")
    items = _phi_items(phi, N)
    sign = -1 if (k + l) % 2 else 1
    coeffs = [CyclotomicInt.scalar(N, 0)]
    for e in range(1, Q):
        terms: dict = {}
        for (r, t), mult in items:
            for m, dt, fam in _divisor_terms(e, r, N, p):
                val = mult * Fraction(dt, N) ** (k + 1) * m**l
                ex = (fam * t * m) % N
                terms[ex] = terms.get(ex, 0) + (sign * val if fam == 1 else val)
        coeffs.append(CyclotomicInt.from_exponents(N, terms))
    return QExpansion(N, tuple(coeffs), label=(k + 2, l))


def limit_depth(l: int, p: int, M: int) -> int:
    """Depth m = M - 1 of the stabilised representative for a negative twist."""
    return M - 1


def eis_p_limit(k: int, l: int, phi, Q: int, p: int, depth: int, M: int | None = None, N: int = 8) -> QExpansion:
    """E^(p)_{k+2, l + (p-1)p^depth} reduced mod p^(depth+1) (or p^M if smaller).

    This is the classical-index representative of a negative twist; it needs
    l + (p-1)p^depth >= 0.
    """
    shift = (p - 1) * p**depth
    if l + shift < 0:
        raise DepthError(f"depth {depth} too small for l={l} at p={p}")
    prec = depth + 1 if M is None else min(M, depth + 1)
    return eis_p_measure(k, l + shift, phi, Q, p, prec, N)


def eis_p(k: int, l: int, phi, Q: int = DEFAULT_Q, p: int = 5, M: int = DEFAULT_M, N: int = 8,
          depth: int | None = None) -> QExpansion:
    """E^(p)_{k+2,l,phi} modulo p^M.

    l >= 0: the moment formula (which the removal identity ties to the
    classical series).  l < 0: the stabilised limit at depth M-1, which must
    exist; ``depth`` may be passed to request a shallower limit, and a depth
    below M-1 raises DepthError since it only determines the series mod p^(depth+1).
    """
    if l >= 0:
        return eis_p_measure(k, l, phi, Q, p, M, N)
    need = limit_depth(l, p, M)
    depth = need if depth is None else depth
    if depth < need:
        raise DepthError(f"depth {depth} only fixes E^(p) mod p^{depth + 1}, need p^{M}")
    f = eis_p_limit(k, l, phi, Q, p, depth, M, N)
    return QExpansion(N, f.coeffs, "padic", p, M, (k + 2, l))


def _reduce(f: QExpansion, M: int) -> QExpansion:
    """Reduce a p-adic series to a lower precision."""
    cs = tuple(PadicCyclotomic(f.p, M, c.value) for c in f.coeffs)
    return QExpansion(f.N, cs, "padic", f.p, M, f.label)


def stabilization_gap(k: int, l: int, phi, Q: int, p: int, depth: int, N: int = 8) -> int:
    """Minimum p-adic valuation of (limit at depth+1) - (limit at depth), capped at depth+2."""
    a = eis_p_limit(k, l, phi, Q, p, depth + 1, depth + 2, N)
    b = eis_p_measure(k, l + (p - 1) * p**depth, phi, Q, p, depth + 2, N)
    return min(_valuation(x - y) for x, y in zip(a.coeffs, b.coeffs))


def _valuation(c: PadicCyclotomic) -> int:
    """Valuation of a coefficient vector mod p^M (M when zero)."""
    best = c.M
    for x in c.value.coeffs:
        if x:
            v = 0
            while x % c.p == 0 and v < c.M:
                x //= c.p
                v += 1
            best = min(best, v)
    return best


# ------------------------------------------------------- identity checkers


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    params: dict
    passed: bool
    first_failure: tuple | None = None


def removal_identity(k: int, l: int, phi, Q: int, p: int, M: int, N: int = 8) -> IdentityCheck:
    """d^l (1 - phi*) E_{k+2,0} = (1 - p^l phi*) d^l E_{k+2,0} = moment series, mod p^M.

    The two classical routes are computed exactly and reduced afterwards, so
    the Bernoulli constant term (not p-integral in general) cancels first.
    """
    E = eisenstein_divisor(k, phi if isinstance(phi, dict) else {phi: 1}, Q, N)
    left = removal_operator(E, 0, p)
    for _ in range(l):
        left = dlogq(left)
    right = E
    for _ in range(l):
        right = dlogq(right)
    right = removal_operator(right, l, p)
    params = {"k": k, "l": l, "p": p, "M": M, "Q": Q}
    e = left.first_difference(right)
    if e is not None:
        return IdentityCheck("frobenius_removal", params, False, ("exact", e))
    moment = eis_p_measure(k + l, l, phi, Q, p, M, N)
    e = left.to_padic(p, M).first_difference(moment)
    if e is not None:
        return IdentityCheck("frobenius_removal", params, False, ("moment", e))
    return IdentityCheck("frobenius_removal", params, True)


def differential_equation(k: int, l: int, phi, Q: int, p: int, M: int, N: int = 8) -> IdentityCheck:
    """d/dlog q E^(p)_{k+2,l} = E^(p)_{k+3,l+1} mod p^M (any integer l)."""
    lhs = dlogq(eis_p(k, l, phi, Q, p, M, N))
    rhs = eis_p(k + 1, l + 1, phi, Q, p, M, N)
    e = lhs.first_difference(rhs)
    return IdentityCheck("differential_equation", {"k": k, "l": l, "p": p, "M": M, "Q": Q}, e is None,
                         None if e is None else (e,))


@dataclass(frozen=True)
class SyntomicSection:
    """alpha = sum_j f_j w^(k-j, j)(1) with f_j = ((-1)^(k-j)/j!) E^(p)_{j+1, j-k-1}.

    The basis w^(k-j,j)(1) has Frobenius eigenvalue p^(j-k-1) and lies in
    Fil^m exactly when j >= m + k + 1.
    """

    k: int
    components: tuple
    frobenius_exponents: tuple
    p: int
    M: int

    def filtration_level(self, j: int) -> int:
        """Largest m with w^(k-j,j)(1) in Fil^m."""
        return j - self.k - 1


def syntomic_section(k: int, phi, Q: int = DEFAULT_Q, p: int = 5, M: int = DEFAULT_M, N: int = 8) -> SyntomicSection:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= p:
        raise ValueError("1/j! must be a p-adic unit: need k < p")
    comps = []
    for j in range(k + 1):
        f = eis_p(j - 1, j - k - 1, phi, Q, p, M, N)
        comps.append(f.scale(Fraction((-1) ** (k - j), factorial(j))))
    return SyntomicSection(k, tuple(comps), tuple(j - k - 1 for j in range(k + 1)), p, M)


def verify_syntomic_ode(k: int, phi, Q: int = DEFAULT_Q, p: int = 5, M: int = DEFAULT_M, N: int = 8) -> IdentityCheck:
    """d f_j + (j+1) f_{j+1} = 0 for j < k and d f_k = (1 - phi*)E_{k+2,0}/k!, mod p^M."""
    sec = syntomic_section(k, phi, Q, p, M, N)
    params = {"k": k, "p": p, "M": M, "Q": Q}
    f = sec.components
    for j in range(k):
        lhs = dlogq(f[j]) + f[j + 1].scale(j + 1)
        if not lhs.is_zero():
            e = next(i for i, c in enumerate(lhs.coeffs) if not _is_zero(c))
            return IdentityCheck("syntomic_ode", params, False, (j, e))
    E = eisenstein_divisor(k, phi if isinstance(phi, dict) else {phi: 1}, Q, N)
    target = removal_operator(E, 0, p).scale(Fraction(1, factorial(k))).to_padic(p, M)
    e = dlogq(f[k]).first_difference(target)
    if e is not None:
        return IdentityCheck("syntomic_ode", params, False, (k, e))
    return IdentityCheck("syntomic_ode", params, True)


def syntomic_exact_cancellation(k: int, phi, Q: int, p: int, depth: int, N: int = 8) -> bool:
    """The j < k telescoping over exact limit representatives l + (p-1)p^depth >= 0.

    Each f_j is replaced by ((-1)^(k-j)/j!) E^(p)_{j+1, j-k-1+s} with a common
    shift s; the cancellation then holds in Z[1/N][zeta_N] with no reduction.
    """
    s = (p - 1) * p**depth
    if s < k + 1:
        raise DepthError("shift too small for an exact representative")
    comps = [eis_p_exact(j - 1, j - k - 1 + s, phi, Q, p, N).scale(Fraction((-1) ** (k - j), factorial(j)))
             for j in range(k + 1)]
    return all((dlogq(comps[j]) + comps[j + 1].scale(j + 1)).is_zero() for j in range(k))


# ------------------------------------------------------- moment congruences


@dataclass
class MomentGrid:
    phi: dict
    p: int
    M: int
    Q: int
    N: int
    table: dict = field(default_factory=dict)

    def get(self, k: int, l: int) -> QExpansion:
        if (k, l) not in self.table:
            self.table[(k, l)] = eis_p(k, l, self.phi, self.Q, self.p, self.M, self.N)
        return self.table[(k, l)]


def build_moment_grid(phi, kmax: int = 8, lmax: int = 6, Q: int = DEFAULT_Q, p: int = 5,
                      M: int = DEFAULT_M, N: int = 8) -> MomentGrid:
    phi = phi if isinstance(phi, dict) else {phi: 1}
    grid = MomentGrid(phi, p, M, Q, N)
    for k in range(1, kmax + 1):
        for l in range(lmax + 1):
            grid.get(k, l)
    return grid


def kummer_pairs(kmax: int, lmax: int, p: int, m: int):
    """Pairs ((k,l),(k',l')) with k = k', l = l' mod (p-1)p^m; partners may leave the grid."""
    step = (p - 1) * p**m
    for k in range(1, kmax + 1):
        for l in range(lmax + 1):
            yield (k, l), (k + step, l)
            yield (k, l), (k, l + step)
            yield (k, l), (k + step, l + step)


@dataclass(frozen=True)
class CongruenceReport:
    p: int
    m: int
    checked: int
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def qexp_kummer(grid: MomentGrid, pairs, m: int) -> CongruenceReport:
    """Coefficientwise congruence mod p^(m+1) between moment series."""
    p = grid.p
    if m + 1 > grid.M:
        raise ValueError("grid precision too low for this depth")
    step = (p - 1) * p**m
    failures, count = [], 0
    for (k, l), (k2, l2) in pairs:
        if (k - k2) % step or (l - l2) % step:
            raise ValueError(f"{(k, l)} and {(k2, l2)} are not in the same class mod {step}")
        if min(k, k2) + 1 < m + 1:
            raise ValueError("x-exponent too small for a congruence at this depth")
        a = _reduce(grid.get(k, l), m + 1)
        b = _reduce(grid.get(k2, l2), m + 1)
        e = a.first_difference(b)
        count += 1
        if e is not None:
            failures.append(((k, l), (k2, l2), e))
    return CongruenceReport(p, m, count, tuple(failures))
