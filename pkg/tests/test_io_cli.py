import json

import numpy as np
import pytest

from jumpinterp.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from jumpinterp.errors import InputError
from jumpinterp.io import read_csv_matrix, read_matrix, read_sequence, read_timeseries
from jumpinterp.lorentz import AtomicMeasureSpace, SampledProcess
from jumpinterp.martingale import dyadic_walk


@pytest.fixture
def files(tmp_path):
    ts = tmp_path / "ts.json"
    ts.write_text(json.dumps({"values": [[0], [1], [0], [2], [0.5]]}))
    csv = tmp_path / "ts.csv"
    csv.write_text("x,y\n0,0\n3,4\n")
    proc = tmp_path / "proc.json"
    f = SampledProcess(AtomicMeasureSpace([0.5, 1.0]), np.random.default_rng(0).normal(size=(2, 4, 1)))
    proc.write_text(json.dumps(f.to_dict()))
    mart = tmp_path / "m.json"
    mart.write_text(json.dumps(dyadic_walk(2, np.random.default_rng(0)).to_dict()))
    Q = tmp_path / "Q.json"
    Q.write_text(json.dumps([[0.5, 0.5], [0.5, 0.5]]))
    return tmp_path


def test_readers(files):
    ts = read_timeseries(files / "ts.csv")
    assert ts.values.shape == (2, 2)
    assert read_timeseries(files / "ts.json").values.shape == (5, 1)
    assert read_matrix(files / "Q.json").n == 2
    (files / "seq.json").write_text(json.dumps({"start": -3, "values": [1, 2]}))
    assert read_sequence(files / "seq.json").start == (-3,)


def test_csv_diagnostics(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,abc\n")
    with pytest.raises(InputError, match="line 2, column 2"):
        read_csv_matrix(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(InputError, match="columns"):
        read_csv_matrix(p)


def test_json_diagnostics(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"values": [1, 2')
    assert main(["compute", "Vr", "--in", str(p)]) == EXIT_USAGE
    assert "line 1" in capsys.readouterr().err


def test_compute_kinds(files, capsys, tmp_path):
    assert main(["compute", "Nlambda", "--in", str(files / "ts.json"), "--lam", "1,0.5"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert [v["N"] for v in out["values"]] == [4, 4]
    assert main(["compute", "Vr", "--in", str(files / "ts.json"), "--r", "1"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(5.5)
    for kind, extra in [("jump", []), ("K", ["--t", "0.5,2"]), ("interp", ["--theta", "0.75"])]:
        assert main(["compute", kind, "--in", str(files / "proc.json"), *extra]) == EXIT_OK
        capsys.readouterr()
    out_dir = tmp_path / "out"
    assert main(["compute", "square", "--in", str(files / "m.json"), "--out", str(out_dir)]) == EXIT_OK
    assert (out_dir / "square.json").exists() and (out_dir / "square.csv").exists()
    capsys.readouterr()
    assert main(["compute", "orbit", "--in", str(files / "Q.json"), "--f", "1,-1", "--N", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["values"] == [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]


def test_usage_errors(files, capsys):
    assert main(["compute", "Nlambda", "--in", str(files / "ts.json")]) == EXIT_USAGE
    assert main(["compute", "orbit", "--in", str(files / "Q.json"), "--f", "1,2,3"]) == EXIT_USAGE
    assert main(["compute", "Vr", "--in", str(files / "missing.json")]) == EXIT_USAGE
    assert main(["verify", "nosuch"]) == EXIT_USAGE
    assert main(["verify", "convexity", "--p", "2"]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE


def test_verify_and_replay(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["verify", "jump-oracle", "--trials", "10", "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "jump-oracle.json").read_text())
    assert report["passed"] and len(report["records"]) == 10
    # an impossible tolerance makes the suite fail and serialise instances
    code = main(["verify", "variation-oracle", "--trials", "20", "--tol", "1e-30", "--out", str(out)])
    assert code == EXIT_FAIL
    fails = sorted(out.glob("variation-oracle-failure-*.json"))
    assert fails
    capsys.readouterr()
    assert main(["verify", "variation-oracle", "--replay", str(fails[0])]) == EXIT_FAIL
    assert json.loads(capsys.readouterr().out)["passed"] is False
    assert main(["verify", "--replay", str(fails[0])]) == EXIT_FAIL
    assert main(["verify"]) == EXIT_USAGE


def test_verify_flags_map_to_suite(capsys):
    assert main(["verify", "interp-equivalence", "--p", "2", "--q", "2", "--rho", "2", "--theta", "0.5",
                 "--trials", "3"]) == EXIT_OK
    assert "[2.0, 2.0, 2.0, 0.5]" in capsys.readouterr().out
