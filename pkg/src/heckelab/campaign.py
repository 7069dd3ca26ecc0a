"""Campaign configuration and runner."""
from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from . import checks
from .cache import Cache
from .curves import get_curve, is_ordinary_split, power_character, registry
from .fields import splitting_type
from .katz import critical_representative
from .report import VerificationReport

SUITES = ("complex", "qexp", "congruence", "main")


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class CampaignConfig:
    curves: list = field(default_factory=lambda: ["32a2"])
    a_grid: list = field(default_factory=lambda: list(range(1, 9)))
    n_grid: list = field(default_factory=lambda: [7, 11])
    primes: list = field(default_factory=lambda: [5])
    digits: int = 60
    padic_prec: int = 6
    q_order: int = 50
    suites: dict = field(default_factory=lambda: {s: True for s in SUITES})
    cache_dir: str | None = ".heckelab-cache"
    out: str | None = None
    level: int = 8
    workers: int = 1
    seed: int = 20240611
    random_sets: int = 20
    oracle_coeffs: int = 40

    def validate(self) -> CampaignConfig:
        if not self.curves:
            raise ConfigError("curves", "must be nonempty")
        known = registry()
        for c in self.curves:
            if c not in known:
                raise ConfigError("curves", f"unknown curve {c!r}; known: {sorted(known)}")
        for name in ("a_grid", "n_grid", "primes"):
            vals = getattr(self, name)
            if not vals or not all(isinstance(v, int) and v > 0 for v in vals):
                raise ConfigError(name, "must be a nonempty list of positive integers")
        if self.digits < 30:
            raise ConfigError("digits", f"need at least 30, got {self.digits}")
        if self.padic_prec < 2:
            raise ConfigError("padic_prec", f"need at least 2, got {self.padic_prec}")
        if self.q_order < 1:
            raise ConfigError("q_order", "must be positive")
        if self.level < 3:
            raise ConfigError("level", "must be at least 3")
        if self.workers < 1:
            raise ConfigError("workers", "must be positive")
        bad = set(self.suites) - set(SUITES)
        if bad:
            raise ConfigError("suites", f"unknown suites {sorted(bad)}; known: {list(SUITES)}")
        for c in self.curves:
            cv = known[c]
            for p in self.primes:
                if splitting_type(p, cv.d) != "split":
                    raise ConfigError("primes", f"{p} is not split in the CM field of {c}")
                if not is_ordinary_split(cv, p):
                    raise ConfigError("primes", f"{p} is not an ordinary prime for {c}")
                if p not in cv.primes:
                    raise ConfigError("primes", f"no prime seed recorded for {p} on {c}")
        return self

    def enabled(self, suite: str) -> bool:
        return bool(self.suites.get(suite, False))

    @classmethod
    def from_dict(cls, obj: dict) -> CampaignConfig:
        names = {f.name for f in fields(cls)}
        extra = set(obj) - names
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown configuration key")
        cfg = cls(**obj)
        if set(cfg.suites) <= set(SUITES):
            cfg.suites = {s: bool(cfg.suites.get(s, False)) for s in SUITES}
        return cfg

    @classmethod
    def from_file(cls, path) -> CampaignConfig:
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config", "top level must be an object")
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------------ planning


def _unfolding_tasks(curve: str, a: int, digits: int, N: int):
    trivial = power_character(get_curve(curve), a).trivial
    if trivial:
        for n in range(a // 2 + 2, a + 2):
            if 2 * n - a > 2:
                yield "check_unfolding", dict(curve=curve, a=a, n=n, mode="level-N", digits=digits, N=N)
    else:
        yield "check_unfolding", dict(curve=curve, a=a, n=a + 2, mode="galois-sum", digits=digits, N=N)
    for s in range(a // 2 + 2, a + 1):
        mode = "reflected-torsion" if trivial else "reflected-conductor"
        yield "check_unfolding", dict(curve=curve, a=a, n=s, mode=mode, digits=digits, N=N)


def plan(cfg: CampaignConfig) -> list[tuple[str, dict]]:
    """Ordered list of (check function name, keyword arguments)."""
    tasks = []
    D, N, M, Q = cfg.digits, cfg.level, cfg.padic_prec, cfg.q_order
    if cfg.enabled("complex"):
        for prm in checks.random_lattice_params(cfg.seed, cfg.random_sets):
            tasks.append(("check_direct_vs_theta", dict(params=prm, digits=D)))
        for prm in checks.random_fe_params(cfg.seed + 1, cfg.random_sets):
            tasks.append(("check_ekl_functional_equation", dict(params=prm, digits=D)))
        for c in cfg.curves:
            for a in cfg.a_grid:
                tasks.append(("check_gauss_identities", dict(curve=c, a=a)))
                tasks.extend(_unfolding_tasks(c, a, D, N))
                tasks.append(("check_l_functional_equation", dict(curve=c, a=a, n=a + 1, digits=D)))
                for n in sorted({a + 1} | {n for n in cfg.n_grid if n > a}):
                    tasks.append(("check_period_determinant", dict(curve=c, a=a, n=n, digits=D, N=N)))
                    tasks.append(("check_period_ratio", dict(curve=c, a=a, n=n, digits=D, N=N)))
    qp = cfg.primes[0]
    if cfg.enabled("qexp"):
        labels = [(1, 3), (3, 1), (1, 5), (5, 2)]
        for k in range(1, 5):
            tasks.append(("check_qexp_oracle", dict(k=k, rho=labels[k - 1], n_coeffs=cfg.oracle_coeffs, N=N, digits=D)))
        for k in range(1, 9):
            for l in range(0, 7):
                tasks.append(("check_removal", dict(k=k, l=l, rho=(1, 3), Q=Q, p=qp, M=M, N=N)))
        for k in range(1, 8):
            for l in (-2, -1, 0, 1, 3, 6):
                tasks.append(("check_differential", dict(k=k, l=l, rho=(1, 3), Q=Q, p=qp, M=M, N=N)))
        for k in range(1, min(5, qp)):
            tasks.append(("check_syntomic", dict(k=k, rho=(1, 3), Q=Q, p=qp, M=M, N=N)))
    if cfg.enabled("congruence"):
        for m in (0, 1):
            if m + 1 <= M:
                tasks.append(("check_qexp_kummer", dict(rho=(1, 3), m=m, Q=Q, p=qp, M=M, N=N)))
        for c in cfg.curves:
            for p in cfg.primes:
                for a in cfg.a_grid:
                    tasks.append(("check_kummer_battery", dict(curve=c, a=a, p=p, digits=D, M=M)))
            for a in cfg.a_grid:
                if power_character(get_curve(c), a).trivial:
                    tasks.append(("check_pseudo_measure", dict(curve=c, a=a, p=cfg.primes[0], digits=D, N=N)))
    if cfg.enabled("main"):
        for c in cfg.curves:
            for p in cfg.primes:
                for a in cfg.a_grid:
                    for n in cfg.n_grid:
                        if n > a and critical_representative(a, n, p) is not None:
                            tasks.append(("check_main_theorem", dict(curve=c, a=a, n=n, p=p, digits=D)))
    return tasks


_CACHED = {"check_qexp_oracle", "check_kummer_battery", "check_pseudo_measure", "check_main_theorem"}


def _execute(task, cache_dir):
    name, kwargs = task
    fn = getattr(checks, name)
    if name in _CACHED and cache_dir:
        kwargs = dict(kwargs, cache=Cache(cache_dir))
    return fn(**kwargs)


def run_campaign(cfg: CampaignConfig, progress=True) -> VerificationReport:
    cfg.validate()
    tasks = plan(cfg)
    report = VerificationReport(config=cfg.to_dict())
    t0 = time.perf_counter()

    def note(i, rec):
        if progress:
            print(f"[{i}/{len(tasks)}] {rec.check_id} {rec.verdict} ({rec.runtime_ms / 1000:.1f} s, "
                  f"{time.perf_counter() - t0:.0f} s elapsed)", file=sys.stderr, flush=True)

    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(_execute, t, cfg.cache_dir) for t in tasks]
            for i, fut in enumerate(futures, 1):
                rec = fut.result()
                note(i, rec)
                report.add(rec)
    else:
        for i, t in enumerate(tasks, 1):
            rec = _execute(t, cfg.cache_dir)
            note(i, rec)
            report.add(rec)
    return report
