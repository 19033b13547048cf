import argparse
import json
import math

import pytest

from torusgreen import cli
from torusgreen.errors import CountViolation


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------- parsing


def test_parse_complex_forms():
    assert cli.parse_complex("0.5") == 0.5
    assert cli.parse_complex("i") == 1j
    assert cli.parse_complex("-i") == -1j
    assert cli.parse_complex("2i") == 2j
    assert cli.parse_complex("1e-3i") == 1e-3j
    assert cli.parse_complex("0.5+0.8660254i") == 0.5 + 0.8660254j
    assert cli.parse_complex("-0.25-1.5j") == -0.25 - 1.5j
    assert cli.parse_complex(" 1+i ") == 1 + 1j
    assert cli.parse_complex("3e2") == 300.0


def test_parse_complex_rejects_garbage():
    for bad in ("", "abc", "1+", "i5", "1 + 2i", "++2"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_complex(bad)


def test_parse_grid():
    assert cli.parse_grid("40x40") == (40, 40)
    assert cli.parse_grid("8X3") == (8, 3)
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_grid("40")
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_grid("axb")


def test_parse_region():
    assert cli.parse_region("0,0.1,0.5,2") == (0.0, 0.1, 0.5, 2.0)
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_region("1,2,3")
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_region("a,b,c,d")


# ------------------------------------------------------- canonical encoding


def test_canonical_json_formatting():
    txt = cli.canonical_json({
        "b": 1.5,
        "a": float("nan"),
        "c": float("inf"),
        "d": -float("inf"),
        "e": True,
        "f": 3,
        "g": None,
        "h": 1 + 2j,
        "i": [1.0, "x\"y\\z"],
    })
    assert txt == (
        '{"a":"nan","b":1.5000000000000000e+00,"c":"inf","d":"-inf",'
        '"e":true,"f":3,"g":null,"h":{"im":2.0000000000000000e+00,'
        '"re":1.0000000000000000e+00},"i":[1.0000000000000000e+00,"x\\"y\\\\z"]}'
    )


def test_canonical_json_sorts_keys_and_is_parseable():
    txt = cli.canonical_json({"z": 1, "a": {"q": 2.0, "b": [True, None]}})
    parsed = json.loads(txt)
    assert parsed == {"z": 1, "a": {"q": 2.0, "b": [True, None]}}
    assert txt.index('"a"') < txt.index('"z"')


def test_run_config_round_trip():
    cfg = cli.RunConfig(command="eval", tau=0.5 + 0.8j,
                        tolerances={"tol": 1e-12}, grid=(40, 40),
                        output_format="json", output_path=None)
    again = cli.RunConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_run_config_rejects_unknown_fields():
    with pytest.raises(ValueError):
        cli.RunConfig.from_dict({"command": "eval", "mystery": 1})


# -------------------------------------------------------------- subcommands


def test_eval_subcommand(capsys):
    code, out, err = run_cli(capsys, "eval", "--tau", "i", "--z", "0.21+0.13i")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["command"] == "eval"
    assert doc["inputs"]["tau"] == {"re": 0.0, "im": 1.0}
    res = doc["results"]
    assert abs(res["green_abs"] - (res["green_rel"] + res["constant"])) < 1e-15
    assert res["hessian"]["trace"] == pytest.approx(1.0, rel=1e-12)
    assert doc["diagnostics"]["constant_nodes"] == 256


def test_critical_subcommand_hex(capsys):
    code, out, _ = run_cli(capsys, "critical", "--tau", "0.5+0.8660254037844386i")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["count"] == 5
    kinds = [p["kind"] for p in doc["results"]["points"]]
    assert kinds.count("ExtraPair") == 1
    assert len(doc["diagnostics"]["half_period_ranking"][0]) == 3


def test_scan_json_and_csv_agree(capsys, tmp_path):
    args = ("scan", "--region", "0.45,0.6,0.55,0.8", "--grid", "2x2")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["nx"] == 2 and doc["results"]["ny"] == 2
    assert len(doc["results"]["cells"]) == 4

    csv_path = tmp_path / "scan.csv"
    code2, out2, _ = run_cli(capsys, *args, "--format", "csv", "--out", str(csv_path))
    assert code2 == 0 and out2 == ""
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "re_tau,im_tau,count,extra_t,extra_s"
    assert len(lines) == 5
    for row, cell in zip(lines[1:], doc["results"]["cells"]):
        fields = row.split(",")
        assert int(fields[2]) == cell["count"]
        assert float(fields[0]) == cell["tau"]["re"]
        if cell["count"] == 3:
            assert fields[3] == "" and fields[4] == ""


def test_csv_only_for_scan(capsys):
    code, _, err = run_cli(capsys, "eval", "--tau", "i", "--z", "0.2",
                           "--format", "csv")
    assert code == 64
    assert "csv" in err


def test_thresholds_subcommand(capsys):
    code, out, _ = run_cli(capsys, "thresholds")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["results"]["b0"] - 0.35472989252248) < 1e-10
    assert abs(doc["results"]["b1"] - 0.70476158133267) < 1e-10


def test_inequalities_single_b(capsys):
    code, out, _ = run_cli(capsys, "inequalities", "--b", "0.9")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["ok"] is True
    assert doc["results"]["n_points"] == 1
    assert doc["diagnostics"]["functional_equation_half"] < 1e-10


def test_mfe_8pi_subcommand(capsys):
    code, out, _ = run_cli(capsys, "mfe", "--tau", "0.5+0.8660254037844386i",
                           "--rho", "8pi", "--grid", "32x32")
    assert code == 0
    doc = json.loads(out)
    res = doc["results"]
    assert res["rho"] == pytest.approx(8 * math.pi)
    assert res["lambda"] == 0.0
    assert res["max_residual"] < 1e-3
    assert res["total_mass"] == pytest.approx(8 * math.pi, rel=1e-9)
    assert doc["inputs"]["lambda"] == 0.0
    assert doc["diagnostics"]["literal_max_residual"] > res["max_residual"]


def test_mfe_4pi_subcommand(capsys):
    code, out, _ = run_cli(capsys, "mfe", "--tau", "i", "--rho", "4pi",
                           "--grid", "32x32")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["branch"] is None
    assert doc["results"]["total_mass"] == pytest.approx(4 * math.pi, rel=1e-9)
    d = doc["diagnostics"]
    assert abs(abs(d["period_integral_g"]["im"]) - math.pi) < 1e-10
    assert d["c_prime"]["re"] == pytest.approx(-1.0)
    assert math.hypot(d["c_tau"]["re"], d["c_tau"]["im"]) == pytest.approx(1.0)


def test_selftest_subcommand(capsys):
    code, out, _ = run_cli(capsys, "selftest", "--samples", "40")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["ok"] is True
    assert len(doc["results"]["checks"]) == 7


# -------------------------------------------------------------- exit codes


def test_usage_errors(capsys):
    assert run_cli(capsys, "eval", "--tau", "i")[0] == 64          # missing --z
    assert run_cli(capsys, "nonsense")[0] == 64
    assert run_cli(capsys)[0] == 64
    assert run_cli(capsys, "scan")[0] == 64                        # missing region


def test_domain_error_exit(capsys):
    # tau in the lower half plane is a domain error, not a crash
    code, out, err = run_cli(capsys, "critical", "--tau", "1-2i")
    assert code == 2
    assert out == ""
    assert "domain error" in err
    # 8pi construction impossible on the square torus
    code, _, err = run_cli(capsys, "mfe", "--tau", "i", "--rho", "8pi")
    assert code == 2
    assert "NoExtraCriticalPoint" in err


def test_consistency_error_exit(capsys, monkeypatch):
    def boom(args):
        raise CountViolation("synthetic count explosion")

    monkeypatch.setitem(cli._HANDLERS, "critical", boom)
    code, out, err = run_cli(capsys, "critical", "--tau", "i")
    assert code == 3
    assert "CONSISTENCY VIOLATION" in err


def test_output_is_byte_stable(capsys, tmp_path):
    # identical invocations must produce identical bytes; the output path is
    # part of the inputs block, so reruns share one path
    path = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "critical", "--tau", "0.5+0.75i",
                         "--out", str(path))
    assert code == 0
    first = path.read_bytes()
    code, _, _ = run_cli(capsys, "critical", "--tau", "0.5+0.75i",
                         "--out", str(path))
    assert code == 0
    assert path.read_bytes() == first
    assert first.endswith(b"\n")


def test_out_writes_unix_newlines(capsys, tmp_path):
    path = tmp_path / "r.json"
    run_cli(capsys, "inequalities", "--b", "0.8", "--out", str(path))
    raw = path.read_bytes()
    assert b"\r" not in raw
