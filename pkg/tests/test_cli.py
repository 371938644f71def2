import csv
import io
import json
import math
import subprocess
import sys

import pytest

from probrenorm import cli, renorm, verify


def write_config(tmp_path, name="cfg.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def rows_of(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def footer_of(text):
    line = [ln for ln in text.splitlines() if ln.startswith("# fit:")][0]
    fields = dict(kv.split("=") for kv in line[len("# fit:"):].split() if "=" in kv)
    return fields


# ---- renormalize -------------------------------------------------------------

def test_renormalize_zeta_minus_one(tmp_path, capsys):
    cfg = write_config(tmp_path, family="power", s=[2, 0], rho=1, m_list=[2, 3, 4, 5, 6])
    assert cli.main(["renormalize", "--config", cfg]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# {")
    rows = rows_of(out)
    assert [r["m"] for r in rows] == ["2", "3", "4", "5", "6"]
    assert tuple(rows[0]) == cli.REPORT_COLUMNS
    assert float(rows[0]["re_E"]) == pytest.approx(0.25, abs=1e-12)
    fit = footer_of(out)
    assert fit["verdict"] == "Strong"
    assert abs(float(fit["S_re"]) + 1 / 12) < 1e-8
    assert abs(float(fit["c_re"]) - 2) < 1e-8


def test_renormalize_convergent(tmp_path, capsys):
    cfg = write_config(tmp_path, family="power", s=[-1, 0], rho=0)
    assert cli.main(["renormalize", "--config", cfg]) == cli.EXIT_OK
    fit = footer_of(capsys.readouterr().out)
    assert abs(float(fit["S_re"]) - math.pi**2 / 6) < 1e-6
    assert abs(float(fit["c_re"]) + 2) < 1e-6


def test_renormalize_grandi_drift_is_a_result(tmp_path, capsys):
    cfg = write_config(tmp_path, family="grandi", rho=0, m_list=[2])
    assert cli.main(["renormalize", "--config", cfg]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert rows_of(out)[0]["verdict"] == "Drift"
    assert "# fit: none" in out


def test_rho_flag_overrides_config(tmp_path, capsys):
    cfg = write_config(tmp_path, family="power", s=[2, 0], rho=1, m_list=[2])
    assert cli.main(["renormalize", "--config", cfg, "--rho", "0"]) == cli.EXIT_OK
    assert rows_of(capsys.readouterr().out)[0]["verdict"] == "Drift"


def test_fallback_flag_is_passed_through(tmp_path, capsys):
    cfg = write_config(tmp_path, family="grandi", rho=0, m_list=[3])
    cli.main(["renormalize", "--config", cfg])
    plain = rows_of(capsys.readouterr().out)[0]["verdict"]
    cli.main(["renormalize", "--config", cfg, "--fallback-analytic-binomial"])
    alt = rows_of(capsys.readouterr().out)[0]["verdict"]
    assert plain == "ExtensionDivergence" and alt != plain


@pytest.mark.parametrize("cfg", [
    {"family": "power", "s": [2, 0], "colour": "red"},
    {"family": "power", "s": [2]},
    {"family": "power", "s": [2, 0], "m_list": [1, 2]},
    {"family": "power", "s": [2, 0], "m_list": [2, 13]},
    {"family": "power", "s": [2, 0], "tolerances": {"speed": 1}},
    {"family": "nope", "s": [2, 0]},
    {"family": {"name": "ehrhart", "params": {"shape": "sphere"}}, "s": [-4, 0]},
    {"family": "power"},
    {"s": [2, 0]},
])
def test_bad_configs_exit_1(tmp_path, cfg):
    assert cli.main(["renormalize", "--config", write_config(tmp_path, **cfg)]) == cli.EXIT_CONFIG


def test_unreadable_config_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert cli.main(["renormalize", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["renormalize", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_evaluation_error_exits_2(tmp_path):
    cfg = write_config(tmp_path, family={"name": "ehrhart", "params": {"shape": "box", "d": 2}}, s=[2, 0])
    assert cli.main(["renormalize", "--config", cfg]) == cli.EXIT_EVAL


def test_s_zero_exits_2(tmp_path):
    cfg = write_config(tmp_path, family="power", s=[0, 0])
    assert cli.main(["renormalize", "--config", cfg]) == cli.EXIT_EVAL


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_output_is_deterministic(tmp_path, fmt):
    cfg = write_config(tmp_path, family="power", s=[0.5, 0], m_list=[2, 3, 4])
    a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
    assert cli.main(["renormalize", "--config", cfg, "--format", fmt, "--output", str(a)]) == 0
    assert cli.main(["renormalize", "--config", cfg, "--format", fmt, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_section_of_config(tmp_path):
    target = tmp_path / "rep.json"
    cfg = write_config(tmp_path, family="power", s=[2, 0], m_list=[2, 3, 4],
                       output={"path": str(target), "format": "json"})
    assert cli.main(["renormalize", "--config", cfg]) == 0
    assert "report" in json.loads(target.read_text())


def test_json_round_trip(tmp_path):
    target = tmp_path / "rep.json"
    cfg = write_config(tmp_path, family="power", s=[2, 1], m_list=[2, 3, 4])
    assert cli.main(["renormalize", "--config", cfg, "--format", "json", "--output", str(target)]) == 0
    data = json.loads(target.read_text())
    again = renorm.RenormReport.from_dict(data["report"])
    direct = renorm.weak_report(cli.hfun.power_family(), 2 + 1j, 1.0, 1, (2, 3, 4))
    assert again == direct
    assert data["metadata"]["family"] == "power"


def test_csv_floats_are_bit_faithful(tmp_path):
    target = tmp_path / "rep.csv"
    cfg = write_config(tmp_path, family="power", s=[0.5, 0], m_list=[2, 3, 4])
    assert cli.main(["renormalize", "--config", cfg, "--output", str(target)]) == 0
    direct = renorm.weak_report(cli.hfun.power_family(), 0.5, 1.0, 1, (2, 3, 4))
    for row, r in zip(rows_of(target.read_text()), direct.results):
        assert complex(float(row["re_E"]), float(row["im_E"])) == r.expectation


# ---- fit ---------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_fit_from_report(tmp_path, capsys, fmt):
    target = tmp_path / f"rep.{fmt}"
    cfg = write_config(tmp_path, family="power", s=[2, 0])
    assert cli.main(["renormalize", "--config", cfg, "--format", fmt, "--output", str(target)]) == 0
    assert cli.main(["fit", str(target), "--format", "json"]) == cli.EXIT_OK
    fit = json.loads(capsys.readouterr().out)
    assert fit["verdict"] == "Strong"
    assert abs(fit["S"][0] + 1 / 12) < 1e-8 and abs(fit["c"][0] - 2) < 1e-8


def test_fit_csv_footer_and_bad_input(tmp_path, capsys):
    target = tmp_path / "rep.csv"
    cfg = write_config(tmp_path, family="power", s=[2, 0])
    cli.main(["renormalize", "--config", cfg, "--output", str(target)])
    capsys.readouterr()
    assert cli.main(["fit", str(target)]) == 0
    assert capsys.readouterr().out.startswith("# fit: verdict=Strong")
    assert cli.main(["fit", str(tmp_path / "missing.csv")]) == cli.EXIT_CONFIG


# ---- verify ------------------------------------------------------------------

def test_verify_oracle_passes(capsys):
    assert cli.main(["verify", "oracle"]) == cli.EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows and all(r["ok"] == "1" for r in rows)
    assert set(rows[0]) == {"check", "value", "bound", "ok"}


def test_verify_breach_exits_3(monkeypatch, capsys):
    monkeypatch.setitem(verify.SUITES, "oracle", lambda: [verify.Check("planted breach", 2.0, 1.0)])
    assert cli.main(["verify", "oracle", "--format", "json"]) == cli.EXIT_BREACH
    data = json.loads(capsys.readouterr().out)
    assert data == [{"check": "planted breach", "value": 2.0, "bound": 1.0, "ok": False}]


def test_verify_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nope"])
    assert exc.value.code == 2


# ---- bernoulli-eval and list-families ---------------------------------------

def parse_eval(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition("  ")
        out[key.strip()] = value.strip()
    return out


def test_bernoulli_eval_power(capsys):
    assert cli.main(["bernoulli-eval", "--family", "power", "--s", "2", "--t", "1"]) == 0
    vals = parse_eval(capsys.readouterr().out)
    assert float(vals["B"]) == pytest.approx(1 / 6, abs=1e-10)
    assert float(vals["oracle_diff"]) < 1e-10


def test_bernoulli_eval_constant_and_hurwitz(capsys):
    assert cli.main(["bernoulli-eval", "--family", "power", "--s", "0"]) == 0
    vals = parse_eval(capsys.readouterr().out)
    assert float(vals["B"]) == 1.0 and vals["D(1-s,t)"] == "pole"
    assert cli.main(["bernoulli-eval", "--family", "hurwitz", "--s", "-2", "--t", "1.5"]) == 0
    vals = parse_eval(capsys.readouterr().out)
    assert vals["status"] == "Converged"
    assert float(vals["pullback_diff_N_vs_N+7"]) < 1e-9


def test_bernoulli_eval_params_and_errors(capsys):
    args = ["bernoulli-eval", "--family", "jacobi", "--s", "-4", "--param", "a=0.5", "--param", "x=0.3"]
    assert cli.main(args) == 0
    assert cli.main(["bernoulli-eval", "--family", "nope", "--s", "2"]) == cli.EXIT_CONFIG
    assert cli.main(["bernoulli-eval", "--family", "grandi", "--s", "2"]) == cli.EXIT_CONFIG
    assert cli.main(["bernoulli-eval", "--family", "jacobi", "--s", "-4", "--param", "q=1"]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit):
        cli.main(["bernoulli-eval", "--family", "power", "--s", "two"])


def test_list_families(capsys):
    assert cli.main(["list-families"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    names = {r["name"] for r in rows}
    assert {"power", "hurwitz", "eta", "character", "ehrhart", "jacobi", "gauss_ideal", "grandi"} <= names
    assert cli.main(["list-families", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert {"nu", "sigma_star", "growth_exponent", "closed_form"} <= set(data[0])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "probrenorm", "list-families"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "power" in proc.stdout
