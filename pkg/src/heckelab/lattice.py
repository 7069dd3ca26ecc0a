"""Eisenstein-Kronecker-Lerch series K*_a(z, w, s) on a lattice in C.

Two evaluators are provided: truncated direct summation with an explicit
tail bound, valid for 2 Re(s) - a > 2, and the incomplete-gamma (theta)
splitting of the Mellin integral, valid for all s.  Both run at
``digits + GUARD`` working digits.
"""
from __future__ import annotations

from dataclasses import dataclass
import mpmath

from .fields import QuadInt, omega_complex

GUARD = 15


class PoleError(ArithmeticError):
    pass


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Lattice Z*w1 + Z*w2 with Im(w2/w1) > 0."""

    w1: mpmath.mpc
    w2: mpmath.mpc

    def __post_init__(self):
        if mpmath.im(self.w2 / self.w1) <= 0:
            raise ValueError("basis must be positively oriented")

    @classmethod
    def cm(cls, omega, d: int) -> Lattice:
        omega = mpmath.mpc(omega)
        return cls(omega, omega * omega_complex(d))

    @classmethod
    def tau(cls, tau) -> Lattice:
        return cls(mpmath.mpc(1), mpmath.mpc(tau))

    @property
    def covolume(self):
        return mpmath.im(mpmath.conj(self.w1) * self.w2)

    @property
    def A(self):
        """Area of a fundamental domain divided by pi."""
        return self.covolume / mpmath.pi

    def scaled(self, lam) -> Lattice:
        return Lattice(self.w1 * lam, self.w2 * lam)

    def coords(self, z):
        """Real coordinates (x, y) with z = x*w1 + y*w2."""
        det = self.covolume
        zc = mpmath.mpc(z)
        x = mpmath.im(zc * mpmath.conj(self.w2)) / (-det)
        y = mpmath.im(mpmath.conj(self.w1) * zc) / det
        return x, y

    def contains(self, z, tol=None) -> bool:
        if tol is None:
            tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 8))
        x, y = self.coords(z)
        return abs(x - mpmath.nint(x)) < tol and abs(y - mpmath.nint(y)) < tol

    def diameter(self):
        """Diameter of the fundamental parallelogram."""
        return max(abs(self.w1 + self.w2), abs(self.w1 - self.w2))

    def points_near(self, z, R):
        """Yield (m, n, gamma) with |z + gamma| <= R, gamma = m w1 + n w2."""
        R = mpmath.mpf(R)
        x0, y0 = self.coords(-mpmath.mpc(z))
        # |x w1 + y w2| >= sigma_min |(x,y)|: bound coordinate ranges by R / h
        h1 = self.covolume / abs(self.w2)  # distance between lines of constant m
        h2 = self.covolume / abs(self.w1)
        mr = int(mpmath.ceil(R / h1)) + 1
        nr = int(mpmath.ceil(R / h2)) + 1
        mc, nc = int(mpmath.nint(x0)), int(mpmath.nint(y0))
        R2 = R * R
        zc = mpmath.mpc(z)
        for n in range(nc - nr, nc + nr + 1):
            base = zc + n * self.w2
            for m in range(mc - mr, mc + mr + 1):
                g = m * self.w1 + n * self.w2
                v = base + m * self.w1
                if mpmath.re(v) ** 2 + mpmath.im(v) ** 2 <= R2:
                    yield m, n, g


def pairing(z, w, lattice: Lattice):
    """<z, w> = exp((conj(w) z - w conj(z)) / A)."""
    z, w = mpmath.mpc(z), mpmath.mpc(w)
    return mpmath.exp((mpmath.conj(w) * z - w * mpmath.conj(z)) / lattice.A)


def _cpow_abs2(x2, s):
    """(x2)^(-s) for real x2 > 0."""
    return mpmath.exp(-s * mpmath.log(x2))


def direct_tail_bound(beta, R, lattice: Lattice):
    """Bound for sum over |z + gamma| > R of |z + gamma|^(-beta), beta > 2.

    Each point owns a translate of the fundamental cell, contained in the
    region |x| > R - diam, and |z + gamma| >= |x| - diam on that cell.
    """
    delta = lattice.diameter()
    r0 = R - 2 * delta
    if r0 <= 0:
        return mpmath.inf
    V = lattice.covolume
    return (2 * mpmath.pi / V) * (r0 ** (2 - beta) / (beta - 2) + delta * r0 ** (1 - beta) / (beta - 1))


def ekl_direct(a: int, z, w, s, lattice: Lattice, digits: int, max_points: int = 400000):
    """Truncated direct summation; returns (value, tail_bound)."""
    with mpmath.workdps(digits + GUARD):
        z, w, s = mpmath.mpc(z), mpmath.mpc(w), mpmath.mpc(s)
        beta = 2 * mpmath.re(s) - a
        if beta <= 2:
            raise PrecisionError(f"direct summation needs 2 Re(s) - a > 2, got {beta}")
        # scale of the leading terms: nearest nonzero lattice translate
        lead = None
        for _, _, g in lattice.points_near(z, 2 * lattice.diameter()):
            r = abs(z + g)
            if r > _zero_tol() and (lead is None or r < lead):
                lead = r
        scale = lead ** (a - 2 * mpmath.re(s))
        target = scale * mpmath.mpf(10) ** (-(digits + 2))
        R = 4 * lattice.diameter()
        while direct_tail_bound(beta, R, lattice) > target:
            R *= 1.5
        est_points = mpmath.pi * (R + lattice.diameter()) ** 2 / lattice.covolume
        if est_points > max_points:
            raise PrecisionError(f"direct summation would need ~{int(est_points)} points")
        total = mpmath.mpc(0)
        A = lattice.A
        for _, _, g in lattice.points_near(z, R):
            x = z + g
            x2 = mpmath.re(x) ** 2 + mpmath.im(x) ** 2
            if x2 < _zero_tol() ** 2:
                continue
            ph = mpmath.exp((mpmath.conj(w) * g - w * mpmath.conj(g)) / A)
            total += mpmath.conj(x) ** a * ph * _cpow_abs2(x2, s)
        return +total, direct_tail_bound(beta, R, lattice)


def _zero_tol():
    return mpmath.mpf(10) ** (-(mpmath.mp.dps - 10))


def upper_gamma(s, x):
    """Gamma(s, x) for x > 0, with a fast path for positive integer s."""
    if mpmath.im(s) == 0:
        sr = mpmath.re(s)
        if sr == int(sr) and 1 <= sr <= 200:
            k = int(sr)
            term = mpmath.mpf(1)
            acc = mpmath.mpf(1)
            for j in range(1, k):
                term = term * x / j
                acc += term
            return mpmath.factorial(k - 1) * mpmath.exp(-x) * acc
        return mpmath.gammainc(sr, x)
    return mpmath.gammainc(s, x)


def _theta_radius(a, s, lattice, digits, t):
    """Radius beyond which incomplete-gamma terms are below 10^-(digits+GUARD)."""
    sig = abs(mpmath.re(s)) + abs(a) + abs(a + 1 - mpmath.re(s)) + 2
    target = (digits + GUARD + 5) * mpmath.log(10) + abs(mpmath.im(s)) * mpmath.pi / 2
    X = mpmath.mpf(10)
    while X - sig * mpmath.log(X + 1) < target:
        X *= 1.2
    return mpmath.sqrt(X * lattice.A / t) + lattice.diameter()


def gamma_ekl(a: int, z, w, s, lattice: Lattice, digits: int, t0=1):
    """Gamma(s) * K*_a(z, w, s), via the incomplete-gamma splitting at t0."""
    with mpmath.workdps(digits + GUARD):
        z, w, s = mpmath.mpc(z), mpmath.mpc(w), mpmath.mpc(s)
        t0 = mpmath.mpf(t0)
        A = lattice.A
        z_in = lattice.contains(z)
        w_in = lattice.contains(w)
        if a == 0 and w_in and s == 1:
            raise PoleError("K*_0(z, w, s) has a pole at s = 1 for w in the lattice")
        if a == 0 and z_in and s == 0:
            raise PoleError("Gamma(s) K*_0(z, w, s) has a pole at s = 0 for z in the lattice")
        total = mpmath.mpc(0)
        R1 = _theta_radius(a, s, lattice, digits, t0)
        for _, _, g in lattice.points_near(z, R1):
            x = z + g
            x2 = mpmath.re(x) ** 2 + mpmath.im(x) ** 2
            if x2 < _zero_tol() ** 2:
                continue
            ph = mpmath.exp((mpmath.conj(w) * g - w * mpmath.conj(g)) / A)
            total += mpmath.conj(x) ** a * ph * upper_gamma(s, t0 * x2 / A) * _cpow_abs2(x2, s)
        s2 = a + 1 - s
        dual = mpmath.mpc(0)
        R2 = _theta_radius(a, s2, lattice, digits, 1 / t0)
        for _, _, g in lattice.points_near(w, R2):
            y = w + g
            y2 = mpmath.re(y) ** 2 + mpmath.im(y) ** 2
            if y2 < _zero_tol() ** 2:
                continue
            ph = mpmath.exp((mpmath.conj(z) * g - z * mpmath.conj(g)) / A)
            dual += mpmath.conj(y) ** a * ph * upper_gamma(s2, y2 / (t0 * A)) * _cpow_abs2(y2, s2)
        total += A ** (a + 1 - 2 * s) * pairing(w, z, lattice) * dual
        if a == 0:
            if z_in:
                total -= pairing(-z, w, lattice) * A ** (-s) * t0**s / s
            if w_in:
                total += A ** (-s) * t0 ** (s - 1) / (s - 1)
        return +total


def ekl_eval(a: int, z, w, s, lattice: Lattice, digits: int, method: str = "theta", t0=1):
    """K*_a(z, w, s; lattice).

    ``method`` is "theta" (all s) or "direct" (2 Re(s) - a > 2 only).
    At poles of Gamma(s) the value is obtained as the limit, which is 0
    unless Gamma(s) K* itself has a pole there.
    """
    if method == "direct":
        return ekl_direct(a, z, w, s, lattice, digits)[0]
    if method != "theta":
        raise ValueError(f"unknown method {method!r}")
    with mpmath.workdps(digits + GUARD):
        s = mpmath.mpc(s)
        if mpmath.im(s) == 0 and mpmath.re(s) <= 0 and mpmath.re(s) == int(mpmath.re(s)):
            return mpmath.mpc(0)
        return gamma_ekl(a, z, w, s, lattice, digits, t0) / mpmath.gamma(s)


def fe_residual(a: int, z, w, s, lattice: Lattice, digits: int, t_left=1, t_right=mpmath.mpf(7) / 4):
    """Residual of Gamma(s)K*_a(z,w,s) = A^(a+1-2s) Gamma(a+1-s) K*_a(w,z,a+1-s) <w,z>.

    The two sides use different splitting points so the check is not an
    algebraic tautology of the evaluator.
    """
    with mpmath.workdps(digits + GUARD):
        s = mpmath.mpc(s)
        lhs = gamma_ekl(a, z, w, s, lattice, digits, t_left)
        rhs = (
            lattice.A ** (a + 1 - 2 * s)
            * gamma_ekl(a, w, z, a + 1 - s, lattice, digits, t_right)
            * pairing(w, z, lattice)
        )
        return abs(lhs - rhs), abs(lhs)


# ---------------------------------------------------------- Eisenstein series


@dataclass(frozen=True)
class TestObject:
    """(C/lattice, scale * dz) with level-N structure given by two N-torsion points."""

    lattice: Lattice
    N: int = 1
    scale: mpmath.mpc = mpmath.mpc(1)

    __test__ = False  # not a pytest class

    def torsion_point(self, i: int, j: int):
        return (i * self.lattice.w1 + j * self.lattice.w2) / self.N


def eis_infty(k: int, l: int, rho, lattice: Lattice, digits: int, method: str = "theta"):
    """E^inf_{k+2,l,rho} = A^(-l) Gamma(k+2) K*_{k+l+2}(0, rho, k+2)."""
    with mpmath.workdps(digits + GUARD):
        a = k + l + 2
        s = k + 2
        if method == "direct":
            val = mpmath.gamma(s) * ekl_direct(a, 0, rho, s, lattice, digits)[0]
        else:
            val = gamma_ekl(a, 0, rho, s, lattice, digits)
        return lattice.A ** (-l) * val


def torsion_points(lattice: Lattice, N: int):
    for i in range(N):
        for j in range(N):
            yield (i * lattice.w1 + j * lattice.w2) / N


def galois_eis_sum(curve, a: int, n: int, digits: int, N: int | None = None, period=None):
    """Galois-summed E^inf_{n, a-n} at the primitive f_a-torsion point.

    For f_a != (1): (1/w0) sum over v in (O_K/f_a)^x of E^inf_{n,a-n,psi(v) rho_a},
    rho_a = Omega/f_a.  For f_a = (1): (1/w_a) sum over nonzero N-torsion points.
    """
    from .curves import complex_period, hecke_character, power_character
    from .fields import residue_unit_group

    pc = power_character(curve, a)
    P = period if period is not None else complex_period(curve, digits)
    with mpmath.workdps(digits + GUARD):
        lat = Lattice.cm(P.omega, curve.d)
        k, l = n - 2, a - n
        if not pc.trivial:
            chi = hecke_character(curve)
            fa = pc.f_a
            rho = P.omega / fa.to_complex()
            total = mpmath.mpc(0)
            for v in residue_unit_group(fa):
                lift = _lift_prime_to(v.rep, fa, chi.f)
                pv = chi.psi(lift)
                total += eis_infty(k, l, pv.to_complex() * rho, lat, digits)
            return total / pc.w0
        if N is None:
            raise ValueError("level N required when f_a = (1)")
        total = mpmath.mpc(0)
        for rho in torsion_points(lat, N):
            if lat.contains(rho):
                continue
            total += eis_infty(k, l, rho, lat, digits)
        return total / pc.w_a


def _lift_prime_to(v: QuadInt, fa: QuadInt, f: QuadInt) -> QuadInt:
    """An element congruent to v mod fa and prime to f."""
    from .fields import ideal_gcd_is_one

    h = fa.norm()
    for t in range(0, 4 * h * h + 4):
        for c in (QuadInt(t, 0, v.d), QuadInt(0, t, v.d)):
            cand = v + fa * c
            if ideal_gcd_is_one(cand, f):
                return cand
    raise ArithmeticError(f"no lift of {v} mod {fa} prime to {f}")


def torsion_sum_residual(a: int, s, lattice: Lattice, N: int, digits: int):
    """Sum over rho in (1/N)L/L of K*_a(0, rho, s) against N^(a+2-2s) K*_a(0, 0, s)."""
    with mpmath.workdps(digits + GUARD):
        s = mpmath.mpc(s)
        lhs = sum(gamma_ekl(a, 0, rho, s, lattice, digits) for rho in torsion_points(lattice, N))
        rhs = mpmath.mpf(N) ** (a + 2 - 2 * s) * gamma_ekl(a, 0, 0, s, lattice, digits)
        return abs(lhs - rhs), abs(rhs)

