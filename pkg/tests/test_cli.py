import json
import math

import numpy as np
import pytest

from dixtrace.cli import main
from dixtrace.summation import PartialSumSeries


def run(*argv):
    return main(list(argv))


def test_trace_convergent_exits_zero(tmp_path, capsys):
    out_json = str(tmp_path / "r.json")
    out_csv = str(tmp_path / "r.csv")
    code = run("trace", "--geometry", "torus:1", "--symbol", "bessel:1:2",
               "--nmax", "1e4", "--out-json", out_json, "--out-csv", out_csv)
    assert code == 0
    text = capsys.readouterr().out
    assert "convergent" in text
    doc = json.load(open(out_json))
    assert doc["schema_version"] == 1
    assert doc["command"] == "trace"
    assert doc["estimate"]["verdict"] == "convergent"
    assert doc["estimate"]["value"] == pytest.approx(2.0, rel=0.02)


def test_trace_divergent_exits_two(capsys):
    code = run("trace", "--geometry", "torus:1", "--symbol", "radial:0",
               "--nmax", "1e4")
    assert code == 2
    assert "divergent" in capsys.readouterr().out


def test_series_csv_round_trips(tmp_path):
    out_csv = str(tmp_path / "series.csv")
    run("trace", "--geometry", "torus:1", "--symbol", "radial:1",
        "--nmax", "1e4", "--out-csv", out_csv)
    back = PartialSumSeries.from_csv(out_csv)
    assert len(back) > 10
    assert back.cutoffs[-1] == 1e4
    header = open(out_csv).readline().strip()
    assert header == "cutoff,count,sum,f"


def test_quasinorm_domain_error_exits_one(capsys):
    code = run("quasinorm", "--geometry", "torus:1", "--symbol", "radial:1",
               "--p", "0.5", "--nmax", "1e4")
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_quasinorm_stable_and_unstable(tmp_path, capsys):
    code = run("quasinorm", "--geometry", "torus:1", "--symbol", "modulus:0.5",
               "--p", "2", "--nmax", "1e6")
    assert code == 0
    code2 = run("quasinorm", "--geometry", "torus:1", "--symbol", "radial:0",
                "--p", "2", "--nmax", "1e6")
    assert code2 == 2


def test_missing_required_flag_exits_one(capsys):
    assert run("trace", "--symbol", "radial:1") == 1
    assert "geometry" in capsys.readouterr().err


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as exc:
        run("trace", "--nmax")  # flag without value
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc2:
        run("no-such-command")
    assert exc2.value.code == 1


def test_config_file_merge_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"geometry": "torus:1", "symbol": "radial:0",
                               "nmax": 1e4}))
    # flag overrides the config's divergent symbol
    code = run("trace", "--config", str(cfg), "--symbol", "bessel:1:2")
    assert code == 0
    # config alone drives a full run
    assert run("trace", "--config", str(cfg)) == 2
    capsys.readouterr()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"geometry": "torus:1", "symbl": "radial:1"}))
    assert run("trace", "--config", str(cfg)) == 1
    assert "symbl" in capsys.readouterr().err


def test_residue_from_samples_file(tmp_path, capsys):
    samples = tmp_path / "dens.txt"
    samples.write_text("0.5 1.5\n2.0 0.0\n")
    out_json = str(tmp_path / "res.json")
    code = run("residue", "--geometry", "torus:1", "--symbol", "bessel:1:2",
               "--nmax", "1e4", "--density-samples-file", str(samples),
               "--out-json", out_json)
    assert code == 0
    doc = json.load(open(out_json))
    assert doc["a_integral"] == pytest.approx(1.0)
    assert doc["estimate"]["value"] == pytest.approx(2.0, rel=0.02)


def test_residue_requires_exactly_one_density_source(tmp_path, capsys):
    samples = tmp_path / "dens.txt"
    samples.write_text("1.0\n")
    code = run("residue", "--geometry", "torus:1", "--symbol", "bessel:1:2",
               "--nmax", "1e4", "--a-integral", "1.0",
               "--density-samples-file", str(samples))
    assert code == 1
    assert run("residue", "--geometry", "torus:1", "--symbol", "bessel:1:2",
               "--nmax", "1e4") == 1
    capsys.readouterr()


def test_weyl_command(tmp_path, capsys):
    out_json = str(tmp_path / "w.json")
    code = run("weyl", "--geometry", "su2", "--nmax", "512",
               "--out-json", out_json)
    assert code == 0
    doc = json.load(open(out_json))
    assert doc["kappa_hat"] == pytest.approx(3.0, rel=0.03)


def test_boundary_and_parametrix_agree(tmp_path, capsys):
    j1 = str(tmp_path / "b.json")
    j2 = str(tmp_path / "p.json")
    a = repr(-math.e)
    assert run("boundary", "--a", a, "--b", "1", "--nmax", "1e4",
               "--out-json", j1) == 0
    assert run("parametrix", "--a", a, "--b", "1", "--nmax", "1e4",
               "--out-json", j2) == 0
    v1 = json.load(open(j1))["estimate"]["value"]
    v2 = json.load(open(j2))["estimate"]["value"]
    assert v1 == v2
    assert v1 == pytest.approx(1 / math.pi, rel=0.02)
    capsys.readouterr()


def test_boundary_eigenvalue_cutoff(capsys):
    code = run("boundary", "--a", repr(-math.e), "--b", "1", "--nmax", "1e4",
               "--cutoff-kind", "eigenvalue", "--kappa", "1")
    assert code == 0
    assert "lambda" in capsys.readouterr().out


def test_boundary_symbol_table(tmp_path, capsys):
    path = tmp_path / "sym.txt"
    rows = ["%d %.17g 0 1 0" % (j, 2 * math.pi * j)
            for j in range(1, 40)] + ["%d %.17g 0 1 0" % (-j, -2 * math.pi * j)
                                      for j in range(1, 40)]
    path.write_text("0 0 -1 1 0\n" + "\n".join(rows) + "\n")
    code = run("boundary", "--boundary-symbol", "table:%s" % path,
               "--nmax", "64")
    assert code == 2  # constant symbol values diverge under index cutoffs
    capsys.readouterr()


def test_oracle_check_passes(tmp_path, capsys):
    out_json = str(tmp_path / "o.json")
    code = run("oracle-check", "--geometry", "torus:1", "--symbol",
               "bessel:1:2", "--cutoff", "50", "--out-json", out_json)
    assert code == 0
    doc = json.load(open(out_json))
    assert doc["report"]["passed"] is True
    assert doc["report"]["max_abs"] < 1e-10


def test_oracle_check_cap_error(capsys):
    code = run("oracle-check", "--geometry", "torus:1", "--symbol", "radial:1",
               "--cutoff", "100000")
    assert code == 1
    capsys.readouterr()


def test_s0_check_exit_codes(capsys):
    base = ["s0-check", "--a", repr(-math.e), "--b", "1", "--nmax", "2048"]
    assert run(*base, "--s-grid", "0,1,2") == 0
    assert run(*base, "--s-grid", "0,1") == 2
    assert run(*base, "--s-grid", "two") == 1
    capsys.readouterr()


def test_threads_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DIXTRACE_THREADS", "2")
    assert run("trace", "--geometry", "su2", "--symbol", "mask:radial:3",
               "--nmax", "100") == 0
    monkeypatch.setenv("DIXTRACE_THREADS", "lots")
    assert run("trace", "--geometry", "su2", "--symbol", "mask:radial:3",
               "--nmax", "100") == 1
    capsys.readouterr()
