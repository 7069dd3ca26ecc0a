"""CM elliptic curves over Q and the data of their Hecke characters."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import mpmath

from .fields import (
    QuadInt,
    associates_class,
    check_disc,
    divisors,
    elements_of_norm,
    is_prime,
    omega_complex,
    padic_embed_K,
    reduce_mod,
    residue_unit_group,
    splitting_type,
    unit_count,
    units,
)


class NoGenerator(ArithmeticError):
    pass


class BadReduction(ValueError):
    pass


@dataclass(frozen=True)
class CurveData:
    label: str
    ainvs: tuple[int, int, int, int, int]
    d: int
    conductor: int
    psi_conductor: QuadInt
    primes: dict[int, int] = field(default_factory=dict, hash=False, compare=False)  # p -> Hensel seed

    def __post_init__(self):
        check_disc(self.d)
        if self.discriminant() == 0:
            raise ValueError(f"{self.label}: singular model")

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self):
        b2, b4, b6, _ = self.b_invariants()
        return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6

    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def g2_g3(self):
        """Invariants of y^2 = 4x^3 - g2 x - g3 for the invariant differential."""
        c4, c6 = self.c_invariants()
        return mpmath.mpf(c4) / 12, mpmath.mpf(c6) / 216

    @property
    def w0(self) -> int:
        return unit_count(self.d)


def _load_registry(path=None) -> dict[str, CurveData]:
    if path is None:
        text = resources.files("heckelab").joinpath("data/curves.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    out = {}
    for rec in raw["curves"]:
        d = rec["d"]
        fx, fy = rec["psi_conductor"]
        data = CurveData(
            label=rec["label"],
            ainvs=tuple(rec["ainvs"]),
            d=d,
            conductor=rec["conductor"],
            psi_conductor=QuadInt(fx, fy, d),
            primes={int(p): int(v["seed"]) for p, v in rec.get("primes", {}).items()},
        )
        if data.conductor != d * data.psi_conductor.norm():
            raise ValueError(f"{data.label}: conductor {data.conductor} != d_K * N(f)")
        out[data.label] = data
    return out


@lru_cache(maxsize=None)
def registry() -> dict[str, CurveData]:
    return _load_registry()


def get_curve(label: str) -> CurveData:
    reg = registry()
    if label not in reg:
        raise KeyError(f"unknown curve {label!r}; known: {sorted(reg)}")
    return reg[label]


# ----------------------------------------------------------- point counts


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=4096)
def _count(ainvs: tuple, q: int) -> int:
    a1, a2, a3, a4, a6 = ainvs
    if q == 2:
        pts = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    pts += 1
        return q + 1 - pts
    total = 0
    for x in range(q):
        disc = (a1 * x + a3) ** 2 + 4 * (x**3 + a2 * x * x + a4 * x + a6)
        total += _legendre(disc, q)
    # #E = 1 + sum_x (1 + legendre)
    return -total


def count_points(curve: CurveData, q: int) -> int:
    """a_q = q + 1 - #E(F_q) for a prime q of good reduction."""
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if curve.conductor % q == 0 or curve.discriminant() % q == 0:
        raise BadReduction(f"{curve.label} has bad reduction at {q}")
    return _count(curve.ainvs, q)


# --------------------------------------------------------- Hecke character


def _trace_match(gen: QuadInt, a_q: int) -> QuadInt:
    hits = [u * gen for u in units(gen.d) if (u * gen).trace() == a_q]
    if len(hits) != 1:
        raise NoGenerator(f"{len(hits)} associates of {gen} have trace {a_q}")
    return hits[0]


def psi_of_prime(curve: CurveData, prime_gen: QuadInt) -> QuadInt:
    """psi of the split prime ideal generated by prime_gen."""
    q = prime_gen.norm()
    if not is_prime(q) or splitting_type(q, curve.d) != "split":
        raise ValueError(f"{prime_gen} does not generate a split prime ideal of degree one")
    if (curve.conductor % q) == 0:
        raise BadReduction(f"{q} divides the conductor")
    return _trace_match(prime_gen, count_points(curve, q))


@dataclass(frozen=True, eq=False)
class HeckeCharacterData:
    curve_label: str
    d: int
    f: QuadInt
    eps: dict  # canonical residue rep (QuadInt) -> unit (QuadInt)
    w0: int

    def eps_of(self, u: QuadInt):
        """epsilon(u) for u prime to f, else None."""
        return self.eps.get(reduce_mod(u, self.f))

    def psi(self, u: QuadInt) -> QuadInt:
        e = self.eps_of(u)
        if e is None:
            raise ValueError(f"{u} is not prime to the conductor")
        return e * u


@lru_cache(maxsize=None)
def hecke_character(curve: CurveData, max_prime: int = 5000) -> HeckeCharacterData:
    """Build the table of epsilon from psi on split primes."""
    f = curve.psi_conductor
    classes = {r.rep for r in residue_unit_group(f)}
    table: dict = {}

    def record(u: QuadInt, val: QuadInt):
        key = reduce_mod(u, f)
        old = table.get(key)
        if old is not None and old != val:
            raise NoGenerator(f"inconsistent epsilon at {key}: {old} vs {val}")
        table[key] = val

    one = QuadInt(1, 0, curve.d)
    for z in units(curve.d):
        # psi((z)) = 1 forces epsilon(z) = z^{-1}
        record(z, (one / z).to_int())
    q = 2
    while len(table) < len(classes):
        q += 1
        if q > max_prime:
            raise NoGenerator(f"could not fill the epsilon table below {max_prime}")
        if not is_prime(q) or curve.conductor % q == 0 or splitting_type(q, curve.d) != "split":
            continue
        a_q = count_points(curve, q)
        for g in {associates_class(x) for x in elements_of_norm(q, curve.d)}:
            val = _trace_match(g, a_q)
            record(g, (val / g).to_int())
    return HeckeCharacterData(curve.label, curve.d, f, table, unit_count(curve.d))


@dataclass(frozen=True, eq=False)
class PowerCharacterData:
    a: int
    d: int
    f_a: QuadInt
    eps_a: dict  # residue rep mod f_a -> unit
    w_a: int
    w0: int

    def eps_of(self, u: QuadInt):
        if self.f_a.norm() == 1:
            return QuadInt(1, 0, self.d)
        return self.eps_a.get(reduce_mod(u, self.f_a))

    def psi_a(self, u: QuadInt):
        """psi^a((u)) = eps^a(u) u^a; zero when u is not prime to f_a."""
        e = self.eps_of(u)
        if e is None:
            return QuadInt(0, 0, self.d)
        return e * u**self.a

    def conj(self) -> PowerCharacterData:
        """The character of psi-bar^a with respect to the conjugate generator."""
        return PowerCharacterData(
            self.a, self.d, self.f_a.conj(),
            {reduce_mod(k.conj(), self.f_a.conj()): v.conj() for k, v in self.eps_a.items()},
            self.w_a, self.w0,
        )

    @property
    def trivial(self) -> bool:
        return self.f_a.norm() == 1


@lru_cache(maxsize=None)
def power_character(curve: CurveData, a: int) -> PowerCharacterData:
    if a <= 0:
        raise ValueError("a must be positive")
    chi = hecke_character(curve)
    f = chi.f
    ea = {k: v**a for k, v in chi.eps.items()}
    one = QuadInt(1, 0, curve.d)
    f_a = None
    for g in divisors(f):
        if all(v == one for k, v in ea.items() if g.divides(k - one)):
            f_a = g
            break
    assert f_a is not None
    if f_a.norm() == 1:
        table = {QuadInt(0, 0, curve.d): one}
    else:
        table = {}
        for k, v in ea.items():
            key = reduce_mod(k, f_a)
            if key in table and table[key] != v:
                raise ArithmeticError("eps^a does not factor through f_a")
            table[key] = v
    w_a = sum(1 for z in units(curve.d) if f_a.divides(z - one))
    return PowerCharacterData(a, curve.d, f_a, table, w_a, chi.w0)


def prime_above(curve: CurveData, p: int) -> QuadInt:
    """Generator of the prime ideal above p fixed by the registry seed."""
    seed = curve.primes.get(p)
    r = padic_embed_K(p, 1, curve.d, seed)
    for g in elements_of_norm(p, curve.d):
        if (g.x + g.y * r) % p == 0:
            return associates_class(g)
    raise NoGenerator(f"no generator of norm {p}")


def psi_frak_p(curve: CurveData, p: int) -> QuadInt:
    return psi_of_prime(curve, prime_above(curve, p))


def is_ordinary_split(curve: CurveData, p: int) -> bool:
    if curve.conductor % p == 0 or splitting_type(p, curve.d) != "split":
        return False
    return count_points(curve, p) % p != 0


# ---------------------------------------------------------------- periods


@dataclass(frozen=True)
class PeriodData:
    omega: mpmath.mpc
    A: mpmath.mpf
    d: int
    digits: int

    def lattice_point(self, m: int, n: int):
        return self.omega * (m + n * omega_complex(self.d))


def _eisenstein_g2_g3(tau, dps: int):
    """g2, g3 of the lattice Z + Z tau via the q-series of E4 and E6."""
    q = mpmath.expjpi(2 * tau)
    e4 = mpmath.mpf(1)
    e6 = mpmath.mpf(1)
    eps = mpmath.mpf(10) ** (-dps - 5)
    n = 1
    qn = q
    while True:
        s3 = sum(mpmath.mpf(k) ** 3 for k in range(1, n + 1) if n % k == 0)
        s5 = sum(mpmath.mpf(k) ** 5 for k in range(1, n + 1) if n % k == 0)
        t4, t6 = 240 * s3 * qn, 504 * s5 * qn
        e4 += t4
        e6 -= t6
        if abs(t6) < eps and n > 2:
            break
        n += 1
        qn *= q
    pi = mpmath.pi
    return (4 * pi**4 / 3) * e4, (8 * pi**6 / 27) * e6


def lattice_invariants(omega, d: int, dps: int):
    """g2, g3 of the lattice omega * O_K."""
    g2o, g3o = _eisenstein_g2_g3(omega_complex(d), dps)
    return g2o / omega**4, g3o / omega**6


def complex_period(curve: CurveData, digits: int) -> PeriodData:
    """Omega with Omega*O_K the period lattice of the invariant differential."""
    if digits < 30:
        raise ValueError("need at least 30 digits")
    with mpmath.workdps(digits + 15):
        g2, g3 = curve.g2_g3()
        g2o, g3o = _eisenstein_g2_g3(omega_complex(curve.d), digits + 15)
        tiny = mpmath.mpf(10) ** (-(digits + 5))
        if abs(g3) < tiny:
            om = mpmath.root(g2o / g2, 4)
        elif abs(g2) < tiny:
            om = mpmath.root(g3o / g3, 6)
        else:
            om = mpmath.sqrt(g3o * g2 / (g2o * g3))
        # canonical unit multiple: argument in [0, 2 pi / w0)
        best = None
        for z in units(curve.d):
            cand = om * z.to_complex()
            arg = mpmath.arg(cand) % (2 * mpmath.pi)
            if arg >= 2 * mpmath.pi - tiny:
                arg = mpmath.mpf(0)
            if best is None or arg < best[0]:
                best = (arg, cand)
        om = best[1]
        if abs(mpmath.im(om)) < tiny * abs(om):
            om = mpmath.mpc(mpmath.re(om), 0)
        rg2, rg3 = lattice_invariants(om, curve.d, digits + 15)
        tol = mpmath.mpf(10) ** (10 - digits)
        if abs(rg2 - g2) > tol * max(1, abs(g2)) or abs(rg3 - g3) > tol * max(1, abs(g3)):
            raise ArithmeticError("period lattice does not reproduce the model invariants")
        A = abs(om) ** 2 * mpmath.sqrt(curve.d) / (2 * mpmath.pi)
        return PeriodData(om, A, curve.d, digits)
