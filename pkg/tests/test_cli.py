import json
import math

import numpy as np
import pytest
from scipy.special import zeta

from riemannlab import cli, exp_sums
from riemannlab.io import read_csv


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def test_eval_two_zeta_two(tmp_path):
    code, out = run(tmp_path, "eval", "--x0", "0", "--t", "0", "--N", "100000")
    assert code == 0
    header, cols, rows = read_csv(out)
    assert cols == ["re", "im"]
    # partial sum of 2 zeta(2): the tail 2 zeta(2, N+1) ~ 2e-5 is missing
    partial = 2 * (math.pi ** 2 / 6 - float(zeta(2, 100001)))
    assert float(rows[0][0]) == pytest.approx(partial, abs=1e-12)
    assert float(rows[0][0]) == pytest.approx(3.28986, abs=3e-5) and float(rows[0][1]) == 0
    assert header["command"] == "eval"


def test_thin_wrapper_matches_library(tmp_path):
    code, out = run(tmp_path, "eval", "--x0", "1/3", "--t", "2/7", "--N", "500")
    v = exp_sums.eval_R(exp_sums.Fraction(1, 3), exp_sums.Fraction(2, 7), 500)
    _, _, rows = read_csv(out)
    assert (float(rows[0][0]), float(rows[0][1])) == (v.real, v.imag)


def test_gauss_zero_class_json(tmp_path):
    code, out = run(tmp_path, "gauss", "--p", "1", "--b", "0", "--q", "2", name="g.json")
    assert code == 0
    doc = json.loads(out.read_text())
    row = dict(zip(doc["columns"], doc["rows"][0]))
    assert row["class"] == "zero" and row["modulus"] == 0


def test_manifest_and_reproducibility(tmp_path):
    args = ["dioph-measure", "--mu", "2", "--modulus", "4", "--q-max", "200",
            "--mc-points", "10000", "--seed", "5"]
    _, a = run(tmp_path, *args, name="a.csv")
    _, b = run(tmp_path, *args, name="b.csv")
    assert a.read_bytes().replace(b"a.csv", b"") == b.read_bytes().replace(b"b.csv", b"")
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert man["seed"] == 5 and man["command"] == "dioph-measure"
    assert "a.csv" in next(iter(man["digests"])) or len(man["digests"]) == 1


def test_bitwise_identical_outputs(tmp_path):
    args = ["spectrum", "--x0", "0", "--grid", "16384", "--j", "14"]
    _, a = run(tmp_path, *args, name="a.csv")
    _, b = run(tmp_path, *args, "--threads", "1", name="b.csv")
    _, _, ra = read_csv(a)
    _, _, rb = read_csv(b)
    assert ra == rb
    assert sum(int(r[2]) for r in ra) == 16384


def test_env_var_default_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    assert cli.main(["cf", "--t", "0.618033988749895", "--depth", "20"]) == 0
    assert (tmp_path / "cf.csv").exists() and (tmp_path / "cf.csv.manifest.json").exists()


@pytest.mark.parametrize("argv", [
    ["eval", "--t", "0", "--bogus", "1"],
    ["gauss", "--p", "2", "--b", "0", "--q", "4"],
    ["eval", "--t", "abc"],
    ["dioph-dim", "--mu", "3", "--j-min", "10", "--j-max", "11"],
    ["spectrum", "--grid", "1000", "--j", "18"],
    ["holder", "--t", "0.3", "--threads", "0"],
])
def test_invalid_input_exit_two(tmp_path, argv, capsys):
    assert cli.main(argv + ["--out", str(tmp_path / "x.csv")]) == 2


def test_unwritable_path(tmp_path, capsys):
    code = cli.main(["gauss", "--p", "1", "--b", "0", "--q", "3",
                     "--out", str(tmp_path / "missing" / "x.csv")])
    assert code == 2 and "cannot write" in capsys.readouterr().err


def test_numerical_failure_exit_three(tmp_path, capsys):
    # no q in 4000N has a ball at these coarse scales: empty box count
    code = cli.main(["dioph-dim", "--mu", "3", "--Q", "1000", "--j-min", "4", "--j-max", "6",
                     "--out", str(tmp_path / "x.csv")])
    assert code == 3 and "numerical failure" in capsys.readouterr().err


def test_bf_traj_columns(tmp_path):
    code, out = run(tmp_path, "bf-traj", "--x0", "0.3", "--M", "4", "--steps", "200")
    header, cols, rows = read_csv(out)
    assert code == 0 and len(rows) == 201 and "gap" in header
    assert cols[0] == "t" and [float(v) for v in rows[0][1:]] == [0, 0, 0, 0]


def test_help_lists_columns(capsys):
    assert cli.main(["flatness", "--help"]) == 0
    assert "F_quadrature" in capsys.readouterr().out
