import json

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.report import CheckRecord, VerificationReport, emit_report, parse_report, sci


def record(anchor="b/x", verdict="pass", kind="exact", **kw):
    return CheckRecord(check_id=kw.pop("check_id", "c"), anchor=anchor, params=kw.pop("params", {"a": 1}),
                       kind=kind, verdict=verdict, **kw)


@st.composite
def reports(draw):
    recs = []
    for i in range(draw(st.integers(0, 5))):
        kind = draw(st.sampled_from(["residual", "exact", "congruence", "symbolic"]))
        recs.append(CheckRecord(
            check_id=f"c{i}",
            anchor=draw(st.sampled_from(["lattice/a", "qexp/b", "measure/c"])),
            params={"k": draw(st.integers(-5, 5)), "s": [1.5, 0.25]},
            kind=kind,
            verdict=draw(st.sampled_from(["pass", "fail"])),
            tolerance="1.00e-45" if kind == "residual" else None,
            runtime_ms=draw(st.floats(0, 1e5, allow_nan=False)),
            residual=sci(mpmath.mpf(draw(st.floats(0, 1)))),
            detail=draw(st.text(max_size=20)),
            provenance={"value": "x"},
            mandatory=draw(st.booleans()),
        ))
    return VerificationReport(recs, {"digits": 60})


@settings(max_examples=40, deadline=None)
@given(reports())
def test_json_round_trip(rep):
    assert parse_report(emit_report(rep, "json")) == rep


def test_json_schema_fields():
    obj = json.loads(emit_report(VerificationReport([record()]), "json"))
    assert set(obj) == {"version", "config", "summary", "checks"}
    assert {"check_id", "anchor", "params", "kind", "verdict", "tolerance", "runtime_ms"} <= set(obj["checks"][0])


def test_sci_keeps_full_precision():
    with mpmath.workdps(60):
        x = mpmath.pi * mpmath.mpf(10) ** -47
        s = sci(x)
        assert "e-47" in s
        assert len(s.split("e")[0].replace(".", "")) == 20
        assert abs(mpmath.mpf(s) - x) < mpmath.mpf(10) ** -66
    assert sci(0) == "0.0e+0"


def test_residual_checks_need_tolerance():
    with pytest.raises(ValueError):
        record(kind="residual")
    with pytest.raises(ValueError):
        record(kind="numeric")
    with pytest.raises(ValueError):
        record(verdict="ok")


def test_table_sorted_by_anchor_and_complete():
    rep = VerificationReport([record("z/last", check_id="one"), record("a/first", check_id="two", detail="why")])
    text = emit_report(rep, "table").decode()
    assert text.index("a/first") < text.index("z/last")
    assert "why" in text and "2/2 checks passed" in text


def test_ok_ignores_optional_failures():
    rep = VerificationReport([record(), record(verdict="fail", mandatory=False)])
    assert rep.ok and rep.summary == {"total": 2, "passed": 1, "failed": 1}
    rep.add(record(verdict="fail"))
    assert not rep.ok


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(VerificationReport(), "xml")
