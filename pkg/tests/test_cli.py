import json

import pytest

from riperm.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_errors(capsys):
    assert _run(capsys)[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2
    assert _run(capsys, "verify", "--suite", "nope")[0] == 2
    assert _run(capsys, "norm", "--space", "lp:1", "--input", "/nonexistent.json")[0] == 2
    assert _run(capsys, "--help")[0] == 0


def test_invalid_config_is_usage_error(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"workers": 0}))
    code, _, err = _run(capsys, "verify", "--config", str(p))
    assert code == 2 and "config" in err


def test_norm_and_bad_space(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"breakpoints": ["0", "1/2", "1"], "values": [2, 0]}))
    code, out, _ = _run(capsys, "norm", "--space", "lp:1", "--input", str(p))
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(1.0)
    assert _run(capsys, "norm", "--space", "nonsense:3", "--input", str(p))[0] == 2


def test_tq(capsys, tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"n": 2, "entries": [1, 0, 0, 1]}))
    code, out, _ = _run(capsys, "tq", "--matrix", str(p), "--q", "inf", "--space", "lp:1")
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(0.5)
    code, out, _ = _run(capsys, "tq", "--matrix", str(p), "--space", "lp:1", "--mode", "mc",
                        "--samples", "2000", "--seed", "3")
    assert code == 0 and json.loads(out)["se"] >= 0
    assert _run(capsys, "tq", "--matrix", str(p), "--mode", "mc")[0] == 2


def test_gamma_coincidence_probe(capsys, tmp_path):
    code, out, _ = _run(capsys, "gamma", "--phi", "linear", "--q", "1", "--csv", str(tmp_path / "g.csv"))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(2.718281828 - 1, rel=1e-6)
    assert (tmp_path / "g.csv").read_text().startswith("j,partial_sum")
    code, out, _ = _run(capsys, "coincidence", "--n", "3", "--k", "3")
    assert code == 0 and [r["num"] for r in json.loads(out)["mu"]] == [1, 1, 0, 1]
    code, out, _ = _run(capsys, "probe", "--dstar", "--space", "lp:2")
    assert code == 0 and json.loads(out)["constant"] <= 1 + 1e-9


def test_census_exit_codes(capsys):
    assert _run(capsys, "census", "--M", "power:2", "--nrange", "-32:32", "--mrange", "1:8")[0] == 0
    assert _run(capsys, "census", "--M", "staircase:2:8", "--b", "1.5",
                "--nrange", "-60:52", "--mrange", "1:12")[0] == 1


def test_verify_single_suite(capsys, tmp_path):
    code, out, _ = _run(capsys, "verify", "--suite", "mean_max", "--out", str(tmp_path))
    assert code == 0 and out.startswith("PASS mean_max")
    assert (tmp_path / "mean_max.json").exists()
