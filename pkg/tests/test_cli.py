import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from sixvertex import cli
from sixvertex import heights as H
from sixvertex.checks import CheckResult
from sixvertex.lattice import rectangle


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, list(csv.DictReader(io.StringIO(out))), out, err


def test_transfer_exact(capsys):
    code, rows, out, _ = run(capsys, "transfer", "--N", "4", "--M", "3", "--c", "3/2",
                             "--exact-rational", "--show-z")
    assert code == 0
    assert out.splitlines()[0] == "sector,k,alpha,logZ,M,Z"
    assert [r["Z"] for r in rows] == ["4", "1225/4", "128001/128", "1225/4", "4"]


def test_global_flags_before_subcommand(capsys):
    code, rows, _, _ = run(capsys, "--exact-rational", "transfer", "--N", "2", "--M", "2",
                           "--c", "2", "--show-z")
    assert code == 0 and [r["Z"] for r in rows] == ["2", "12", "2"]


def test_free_energy_header(capsys):
    code, rows, out, _ = run(capsys, "free-energy", "--N", "8", "--c", "1", "--kmax", "2")
    assert code == 0
    assert out.splitlines()[0] == "N,c,alpha,f_hat,g,g_over_alpha,g_over_alpha2"
    assert float(rows[0]["f_hat"]) == pytest.approx(0.439601098213, abs=1e-9)


def test_sample_and_dumps(capsys, tmp_path):
    hp, ap = tmp_path / "h.csv", tmp_path / "a.csv"
    code, rows, out, _ = run(capsys, "sample", "--domain", "rect:5x5", "--c", "2",
                             "--sweeps", "200", "--burnin", "10", "--batches", "10",
                             "--dump-heights", str(hp), "--dump-arrows", str(ap), "--seed", "4")
    assert code == 0
    assert out.splitlines()[0] == "observable,mean,stderr,batches,sweeps,seed"
    assert all(r["seed"] == "4" for r in rows)
    D = rectangle(5, 5)
    with open(hp, encoding="utf-8") as fh:
        assert fh.readline().strip() == "x,y,h"
        fh.seek(0)
        h = H.heights_from_rows(D, csv.DictReader(fh))
    H.validate(D, h, fixed=H.zero_one(D))
    with open(ap, encoding="utf-8") as fh:
        assert fh.readline().strip() == "x,y,dir,orient"
        fh.seek(0)
        a = H.arrows_from_rows(D, csv.DictReader(fh))
    assert np.array_equal(a, H.height_to_arrows(D, h))


def test_sample_reproducible(capsys):
    args = ("sample", "--domain", "torus:6", "--c", "1", "--sweeps", "100", "--burnin", "5",
            "--batches", "5", "--seed", "9")
    assert run(capsys, *args)[2] == run(capsys, *args)[2]


def test_usage_errors(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "transfer", "--N", "4")[0] == 1
    assert run(capsys, "transfer", "--N", "4", "--M", "2", "--bogus")[0] == 1
    assert run(capsys, "sample", "--domain", "hexagon:3")[0] == 1
    assert run(capsys, "circuits", "--n", "a,b")[0] == 1


def test_precondition_errors(capsys):
    assert run(capsys, "transfer", "--N", "3", "--M", "2")[0] == 2
    assert run(capsys, "verify", "--c", "1/2")[0] == 2
    assert run(capsys, "variance", "--torus", "8", "--pairs", "6")[0] == 2
    assert run(capsys, "loopmap", "--N", "4", "--L", "3")[0] == 2


def test_verification_failure_exit(capsys, monkeypatch):
    bad = CheckResult("fake", "inst", 2)
    bad.record(False, 1.0, "witness")
    monkeypatch.setattr("sixvertex.checks.battery.run_verify", lambda *a, **k: [bad])
    code, rows, out, err = run(capsys, "verify")
    assert code == 3
    assert out.splitlines()[0] == "check,instance_id,c,status,max_violation,witness"
    assert rows[0]["status"] == "fail" and "witness" in err


def test_loopmap(capsys):
    code, rows, _, _ = run(capsys, "loopmap", "--c", "2")
    assert code == 0
    assert {r["status"] for r in rows} == {"pass"}
    assert {r["c"] for r in rows} == {"2"}


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 8, "kmax": 2}))
    code, rows, _, _ = run(capsys, "--config", str(cfg), "free-energy", "--N", "6")
    assert code == 0
    assert {r["N"] for r in rows} == {"6"} and len(rows) == 3
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "--config", str(cfg), "free-energy", "--N", "6")[0] == 1
    cfg.write_text("{not json")
    assert run(capsys, "--config", str(cfg), "free-energy", "--N", "6")[0] == 1


def test_threads_env_override(capsys, monkeypatch):
    seen = {}

    def fake(N, c, d, **kw):
        seen.update(kw)
        return [], {"a": 0.0, "b": 0.0, "b_stderr": 0.0, "r2": 1.0}

    monkeypatch.setattr("sixvertex.experiments.variance_experiment", fake)
    monkeypatch.setenv("SIXV_THREADS", "3")
    assert run(capsys, "variance", "--torus", "8", "--threads", "1")[0] == 0
    assert seen["threads"] == 3
    monkeypatch.setenv("SIXV_THREADS", "many")
    assert run(capsys, "variance", "--torus", "8")[0] == 1


def test_out_file_utf8(capsys, tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["transfer", "--N", "2", "--M", "2", "--out", str(out)]) == 0
    assert out.read_bytes().decode("utf-8").startswith("sector,k,alpha,logZ,M\n")


def test_enumerate_summary(capsys):
    code, rows, _, _ = run(capsys, "enumerate", "--domain", "rect:6x6", "--c", "2",
                           "--exact-rational")
    assert code == 0
    assert rows[0] == {"quantity": "count", "value": "1322"}


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "sixvertex.cli", "transfer", "--N", "2",
                        "--M", "2"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("sector,k,alpha,logZ,M")
