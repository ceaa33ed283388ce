import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sgdesitter import cli

KEYS = {"quantity", "params", "value_re", "value_im", "error_est", "pass", "paper_ref"}


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.mark.parametrize("argv", [
    ["geom", "transform"],
    ["prop", "eval"],
    ["vertex", "corr"],
    ["vertex", "corr", "--alpha", "inf"],
    ["fock", "verify", "--set", "fock.n_max=6", "--set", "fock.total_max=4"],
    ["bounds", "smatrix"],
    ["bounds", "field"],
    ["estimate", "norm2", "--budget", "100000"],
])
def test_subcommands_run(capsys, argv):
    code, out, _ = _run(capsys, *argv)
    recs = _records(out)
    assert code == 0
    assert recs and all(set(r) == KEYS for r in recs)
    assert all(isinstance(r["params"], dict) for r in recs)


def test_vertex_fock_oracle_record(capsys):
    code, out, _ = _run(capsys, "vertex", "corr", "--set", "vertex.fock=true", "--set", "vertex.gammas=1.0,-1.0")
    recs = {r["quantity"]: r for r in _records(out)}
    assert code == 0
    assert recs["vertex_fock_oracle"]["pass"] is True
    assert recs["vertex_fock_oracle"]["params"]["tail"] < 0.1


def test_invalid_coupling_exit_two(capsys):
    code, out, err = _run(capsys, "bounds", "smatrix", "--beta2", str(4 * np.pi))
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["field"] == "run.beta2"


@pytest.mark.parametrize("argv,field", [
    (["geom", "transform", "--set", "geom.tau=4.0"], "geom.tau"),
    (["prop", "eval", "--set", "prop.ordering=Sideways"], "prop.ordering"),
    (["estimate", "norm2", "--set", "estimate.k=3"], "estimate.k"),
    (["bounds", "smatrix", "--set", "nosuch.key=1"], "nosuch"),
    (["check", "all", "--tol", "nosuch.tol=1"], "tol.nosuch.tol"),
    (["bounds", "smatrix", "--set", "g.kind=indicator", "--set", "g.lo=0.0"], "g"),
])
def test_config_errors(capsys, argv, field):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["field"].startswith(field)


def test_failing_record_exit_one(capsys):
    # a tolerance nobody can meet turns the round trip record into a failure
    code, out, _ = _run(capsys, "geom", "transform", "--tol", "roundtrip=-1")
    assert code == 1
    assert any(r["pass"] is False for r in _records(out))


def test_estimate_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.jsonl"
        subprocess.run([sys.executable, "-m", "sgdesitter.cli", "estimate", "norm2", "--seed", "7",
                        "--budget", "200000", "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rec = json.loads(outs[0])
    assert rec["params"]["seed"] == 7 and rec["pass"] is True


def test_out_appends(tmp_path, capsys):
    path = tmp_path / "r.jsonl"
    for _ in range(2):
        assert cli.main(["geom", "transform", "--out", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 6


def test_csv_round_trip(tmp_path, capsys):
    _, js, _ = _run(capsys, "bounds", "smatrix")
    path = tmp_path / "r.csv"
    for _ in range(2):  # the header is written once
        cli.main(["bounds", "smatrix", "--format", "csv", "--out", str(path)])
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    recs = _records(js)
    assert len(rows) == 2 * len(recs)
    for row, r in zip(rows, recs):
        assert row["quantity"] == r["quantity"]
        assert float(row["value_re"]) == r["value_re"]
        assert json.loads(row["params"]) == r["params"]


def test_seventeen_digits():
    assert cli.dumps(0.1) == "0.10000000000000001"
    assert float(cli.dumps(math.pi)) == math.pi
    assert cli.dumps({"a": [1, None, True, np.float64(2.5)]}) == '{"a": [1, null, true, 2.5]}'
    assert cli.dumps(float("inf")) == "Infinity"


def test_smatrix_orders(capsys):
    _, out, _ = _run(capsys, "bounds", "smatrix", "--beta2", str(2 * np.pi))
    recs = _records(out)
    orders = [r for r in recs if r["quantity"] == "smatrix_order_bound"]
    assert [r["params"]["k"] for r in orders] == list(range(11))
    assert orders[0]["value_re"] == 1.0
    Cg = next(r for r in recs if r["quantity"] == "C_g")["value_re"]
    assert orders[1]["value_re"] == pytest.approx(2 * Cg, rel=1e-14)
    assert recs[-1]["quantity"] == "smatrix_tail_k_star"


def test_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.ini"
    conf.write_text("[run]\nbeta2 = 3.0\n\n[bounds]\nk_max = 3\n\n[g]\nkind = tau_bump\ncenter = 1.5\nwidth = 0.4\n")
    _, out, _ = _run(capsys, "bounds", "smatrix", "--config", str(conf))
    recs = _records(out)
    assert all(r["params"]["beta2"] == 3.0 for r in recs)
    assert sum(r["quantity"] == "smatrix_order_bound" for r in recs) == 4
    assert recs[0]["params"]["g"]["terms"][0]["tau"] == {"kind": "bump", "center": 1.5, "width": 0.4}
    # --set beats the file, flags beat --set
    _, out, _ = _run(capsys, "bounds", "smatrix", "--config", str(conf), "--set", "run.beta2=5.0",
                     "--set", "bounds.k_max=1")
    recs = _records(out)
    assert recs[0]["params"]["beta2"] == 5.0 and len(recs) == 4
    _, out, _ = _run(capsys, "bounds", "smatrix", "--config", str(conf), "--set", "run.beta2=5.0", "--beta2", "6.0")
    assert _records(out)[0]["params"]["beta2"] == 6.0


def test_check_all(capsys):
    code, out, err = _run(capsys, "check", "all", "--budget", "200000")
    recs = _records(out)
    results = [r for r in recs if r["quantity"] == "check_result"]
    assert len(results) == 15
    assert code == 0 and all(r["pass"] for r in results)
    assert err.count("[PASS]") == 15
