"""Verification records and their JSON / table renderings."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import mpmath

from . import __version__

KINDS = ("residual", "exact", "congruence", "symbolic")


def sci(x, digits: int = 20) -> str:
    """Scientific notation with a fixed number of significant digits."""
    x = mpmath.mpf(x)
    if x == 0:
        return "0.0e+0"
    if mpmath.isinf(x):
        return "inf"
    return mpmath.nstr(x, digits, min_fixed=1, max_fixed=0, strip_zeros=False)


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    params: dict
    kind: str
    verdict: str  # "pass" or "fail"
    tolerance: str | None = None
    runtime_ms: float = 0.0
    residual: str | None = None
    detail: str = ""
    provenance: dict = field(default_factory=dict)
    mandatory: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown check kind {self.kind!r}")
        if self.verdict not in ("pass", "fail"):
            raise ValueError(f"verdict must be pass or fail, got {self.verdict!r}")
        if self.kind == "residual" and self.tolerance is None:
            raise ValueError("residual checks must carry their tolerance")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class VerificationReport:
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    version: str = __version__

    def add(self, rec: CheckRecord):
        self.records.append(rec)

    @property
    def summary(self) -> dict:
        n_pass = sum(r.passed for r in self.records)
        return {"total": len(self.records), "passed": n_pass, "failed": len(self.records) - n_pass}

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records if r.mandatory)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "summary": self.summary,
            "checks": [asdict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> VerificationReport:
        recs = [CheckRecord(**r) for r in obj["checks"]]
        return cls(recs, obj.get("config", {}), obj.get("version", __version__))

    def __eq__(self, other):
        return isinstance(other, VerificationReport) and self.to_dict() == other.to_dict()


def emit_report(report: VerificationReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "table":
        return _table(report).encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(data.decode()))


def _table(report: VerificationReport) -> str:
    rows = sorted(report.records, key=lambda r: (r.anchor, r.check_id))
    head = ("anchor", "check", "kind", "verdict", "residual", "tolerance", "ms", "params")
    body = [
        (r.anchor, r.check_id, r.kind, r.verdict, r.residual or "-", r.tolerance or "-",
         f"{r.runtime_ms:.0f}", json.dumps(r.params, sort_keys=True))
        for r in rows
    ]
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)] if body else [len(h) for h in head]
    fmt_row = lambda row: "  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip()  # noqa: E731
    lines = [fmt_row(head), fmt_row(["-" * w for w in widths])]
    lines += [fmt_row(r) for r in body]
    lines.append("")
    for r in rows:
        lines.append(f"{r.anchor} {r.check_id}{'' if r.mandatory else ' (optional)'}")
        for k, v in sorted(r.provenance.items()):
            lines.append(f"    {k}: {v}")
        for ln in r.detail.splitlines():
            lines.append(f"    | {ln}")
    s = report.summary
    lines.append("")
    lines.append(f"{s['passed']}/{s['total']} checks passed (version {report.version})")
    lines.append(f"config: {json.dumps(report.config, sort_keys=True)}")
    return "\n".join(lines) + "\n"
