import json

import pytest

from heckelab import campaign, checks
from heckelab.campaign import CampaignConfig, ConfigError, plan, run_campaign
from heckelab.cli import main
from heckelab.report import CheckRecord, parse_report


def write_config(tmp_path, **kw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(kw))
    return str(path)


def test_empty_suites_give_empty_report(capsys):
    assert main(["--suite", "none", "--quiet"]) == 0
    rep = parse_report(capsys.readouterr().out.encode())
    assert rep.summary["total"] == 0 and rep.ok


def test_inert_prime_rejected_naming_field(capsys):
    assert main(["--p", "3", "--suite", "none"]) == 2
    assert "primes" in capsys.readouterr().err
    with pytest.raises(ConfigError) as exc:
        CampaignConfig(primes=[7]).validate()
    assert exc.value.field == "primes"


@pytest.mark.parametrize("bad,field", [
    ({"digits": 20}, "digits"),
    ({"padic_prec": 1}, "padic_prec"),
    ({"a_grid": []}, "a_grid"),
    ({"curves": ["11a1"]}, "curves"),
    ({"suites": {"bogus": True}}, "suites"),
])
def test_invalid_configs(bad, field):
    with pytest.raises(ConfigError) as exc:
        CampaignConfig.from_dict(bad).validate()
    assert exc.value.field == field


def test_unknown_config_key(tmp_path, capsys):
    path = write_config(tmp_path, digitz=40)
    with pytest.raises(ConfigError) as exc:
        CampaignConfig.from_file(path)
    assert exc.value.field == "digitz"
    assert main(["--config", path]) == 2


def test_flags_override_file(tmp_path):
    from heckelab.cli import build_parser, config_from_args

    path = write_config(tmp_path, digits=50, a_grid=[2], suites={"qexp": True})
    cfg = config_from_args(build_parser().parse_args(["--config", path, "--digits", "40", "--a", "3",
                                                      "--suite", "congruence,main"]))
    assert cfg.digits == 40 and cfg.a_grid == [3]
    assert cfg.suites == {"complex": False, "qexp": False, "congruence": True, "main": True}
    cfg2 = config_from_args(build_parser().parse_args(["--config", path]))
    assert cfg2.digits == 50 and cfg2.enabled("qexp") and not cfg2.enabled("complex")


def test_curve_flag_picks_its_prime():
    from heckelab.cli import build_parser, config_from_args

    cfg = config_from_args(build_parser().parse_args(["--curve", "27a3", "--suite", "none"]))
    assert cfg.curves == ["27a3"] and cfg.primes == [7]


def test_plan_covers_default_grid():
    names = {name for name, _ in plan(CampaignConfig())}
    assert names == {n for n in dir(checks) if n.startswith("check_")}
    main_tasks = [kw for name, kw in plan(CampaignConfig()) if name == "check_main_theorem"]
    assert {"a": 6, "n": 7} in [{"a": t["a"], "n": t["n"]} for t in main_tasks]


def small_config(tmp_path, cache):
    return CampaignConfig(a_grid=[1], n_grid=[2], digits=30, padic_prec=3, q_order=12, random_sets=1,
                          suites={"complex": True, "qexp": False, "congruence": True, "main": False},
                          cache_dir=str(tmp_path / cache))


def test_reruns_reproduce_residual_digits(tmp_path):
    a = run_campaign(small_config(tmp_path, "c1"), progress=False)
    b = run_campaign(small_config(tmp_path, "c2"), progress=False)
    assert a.ok and b.ok
    assert [(r.check_id, r.residual, r.verdict) for r in a.records] == [
        (r.check_id, r.residual, r.verdict) for r in b.records]


def fake_failure():
    return CheckRecord("fake", "test/fake", {}, "exact", "fail")


def test_exit_code_reflects_mandatory_failures(monkeypatch, capsys, tmp_path):
    monkeypatch.setattr(campaign, "plan", lambda cfg: [("check_fake", {})])
    monkeypatch.setattr(checks, "check_fake", fake_failure, raising=False)
    out = tmp_path / "rep.json"
    assert main(["--no-cache", "--out", str(out)]) == 1
    io = capsys.readouterr()
    assert io.out == "" and "check_fake" not in io.out
    assert "fake" in io.err
    assert parse_report(out.read_bytes()).summary["failed"] == 1


def test_check_exceptions_are_recorded():
    rec = checks.check_unfolding("32a2", 4, 6, "galois-sum", digits=30)
    assert rec.verdict == "fail" and "ValueError" in rec.detail
    assert rec.provenance
