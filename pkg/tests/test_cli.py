import csv
import io
import json
import subprocess
import sys

import pytest

from torusblocks.cli import DEFAULTS, read_config, run
from torusblocks.report import FIELDS, VerifyReport, emit, fmt_residual


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_block_nekrasov_json(capsys):
    code, out, _ = call(capsys, "block", "nekrasov", "--gamma", "1.1", "--P", "0.4", "--alpha", "0.6", "--order", "6")
    assert code == 0
    data = json.loads(out)
    assert len(data["coefficients"]) == 7 and data["coefficients"][0] == [1.0, 0.0]
    assert list(data["config"]) == sorted(data["config"])


def test_series_csv(capsys):
    code, out, _ = call(capsys, "block", "zamo", "--order", "4", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["n", "re", "im"] and len(rows) == 6


def test_unknown_flag_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["block", "nekrasov", "--bogus", "1"])
    assert exc.value.code == 2


def test_bad_value_exit_2(capsys):
    code, _, err = call(capsys, "block", "nekrasov", "--gamma", "2.5")
    assert code == 2 and "gamma" in err


def test_verify_series_pass_and_fail(capsys):
    code, out, _ = call(capsys, "verify", "series", "--order", "8")
    rec = json.loads(out)[0]
    assert code == 0 and rec["pass"] is True
    assert list(rec) == list(FIELDS)
    code, out, _ = call(capsys, "verify", "series", "--order", "8", "--tol", "1e-30")
    assert code == 1 and json.loads(out)[0]["pass"] is False


def test_verify_round_trip(capsys):
    code, out, _ = call(capsys, "verify", "shift0", "--gamma", "0.9", "--no-timing")
    recs = json.loads(out)
    assert code == 0 and len(recs) == 4
    back = [VerifyReport.from_record(r) for r in recs]
    assert emit(back, "json") == out


def test_verify_csv_rows(capsys):
    code, out, _ = call(capsys, "verify", "momentum", "--gamma", "0.8", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 3
    assert list(rows[0]) == list(FIELDS)
    assert all(r["pass"] == "true" for r in rows)
    json.loads(rows[0]["config"])


def test_residual_six_digits():
    assert fmt_residual(1.23456789e-11) == "1.23457e-11"
    assert fmt_residual(0.5) == "0.5"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngamma = 1.3\norder = 4\nP = 0.2\n")
    assert read_config(str(cfg)) == {"gamma": "1.3", "order": "4", "P": "0.2"}
    code, out, _ = call(capsys, "block", "nekrasov", "--config", str(cfg), "--order", "6")
    conf = json.loads(out)["config"]
    assert code == 0 and conf["gamma"] == 1.3 and conf["order"] == 6 and conf["P"] == 0.2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    code, _, _ = call(capsys, "block", "nekrasov", "--config", str(bad))
    assert code == 2


def test_complex_momentum(capsys):
    code, out, _ = call(capsys, "block", "df", "--gamma", "0.8", "--P", "0.3+0.1i", "--q", "0.2")
    data = json.loads(out)
    assert code == 0 and data["config"]["P"] == [0.3, 0.1] and data["error"] < 1e-9


def test_specfn(capsys):
    code, out, _ = call(capsys, "specfn", "hyp2f1", "--A", "1", "--B", "1", "--C", "2", "--w", "0.5")
    import math
    assert code == 0 and abs(json.loads(out)["value"][0] - 2 * math.log(2)) < 1e-13
    for fn, args in (("theta", ["--u", "0.3"]), ("eta", []), ("wp", ["--u", "0.2"]),
                     ("dgamma", ["--z", "1.5"]), ("reflection", ["--alpha", "1.0"])):
        code, out, _ = call(capsys, "specfn", fn, *args)
        assert code == 0 and json.loads(out)["config"]["function"] == fn


def test_df_extract(capsys):
    code, out, _ = call(capsys, "block", "df", "--gamma", "0.8", "--P", "0.5", "--extract", "4")
    data = json.loads(out)
    assert code == 0 and len(data["coefficients"]) == 5 and data["config"]["fit_degree"] == 16


def test_out_file(tmp_path, capsys):
    path = tmp_path / "o.json"
    code, out, _ = call(capsys, "verify", "series", "--out", str(path), "--no-timing")
    assert code == 0 and out == "" and json.loads(path.read_text())[0]["runtime_ms"] == 0


def test_thread_count_byte_identical(tmp_path):
    args = [sys.executable, "-m", "torusblocks", "block", "gmc", "--gamma", "0.8", "--alpha", "-0.8",
            "--samples", "2000", "--modes", "64", "--grid", "256"]
    outs = []
    for threads in ("1", "3"):
        env = {"TORUS_BLOCKS_THREADS": threads, "PATH": ""}
        res = subprocess.run(args, capture_output=True, env=env, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1] and b"stderr" in outs[0]


def test_defaults_cover_flags():
    assert {"gamma", "P", "alpha", "samples", "seed", "modes", "grid", "tol", "format"} <= set(DEFAULTS)
