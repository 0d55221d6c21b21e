from __future__ import annotations

import json

import numpy as np
import pytest

from frachyp.cli import load_system, main, parse_system
from frachyp.cli import SpecFileError


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


SYMMETRIC = {"alpha": 0.5, "symmetric": {"A": [[[0, 1], [1, 0]]], "B": [[0, 0], [0, 0]]},
             "grid": {"n": 1, "half_width": 8.0, "points": 64}}
SCALAR_S1 = {"alpha": 0.5, "P0": [[[0, 0]]], "Pnu": [[[[1, 0]]]]}


def test_ml(capsys):
    assert main(["ml", "--alpha", "0.5", "--re", "1", "--im", "0"]) == 0
    out = capsys.readouterr().out.split()
    assert float(out[2]) == pytest.approx(5.00898008076228, rel=1e-14)
    assert main(["ml", "--alpha", "1", "--deriv", "1", "0"]) == 0
    assert float(capsys.readouterr().out.split()[2]) == pytest.approx(1.0)
    assert main(["ml", "--alpha", "0.5", "nan"]) == 1
    assert main(["ml", "--alpha", "-1", "1"]) == 1


def test_reduce_round_trip(tmp_path, capsys):
    assert main(["reduce", "--beta", "1.5", "--n", "1", "--out", str(tmp_path)]) == 0
    path = next(tmp_path.glob("reduce*.json"))
    doc = json.loads(path.read_text())
    assert np.array_equal(np.array(doc["symmetric"]["A"])[0, :, :, 0], [[0, -1], [-1, 0]])
    system = load_system(path)
    assert system.alpha == 0.75
    assert main(["classify", str(path), "--out", str(tmp_path), "--expect", "hyperbolic"]) == 0
    assert capsys.readouterr().out.strip().endswith("fractional_hyperbolic")
    assert main(["solve", str(path), "--t", "1.0", "--initial", "dw", "--grid-points", "64",
                 "--box", "8", "--out", str(tmp_path)]) == 0
    assert list(tmp_path.glob("solve*.csv")) and list(tmp_path.glob("solve*.json"))


def test_classify_symmetric_and_rejected(tmp_path):
    sym = write(tmp_path / "sym.json", SYMMETRIC)
    assert main(["classify", str(sym), "--out", str(tmp_path)]) == 0
    report = json.loads(next(tmp_path.glob("classify*.json")).read_text())
    assert report["verdict"] == "fractional_hyperbolic"
    bad = write(tmp_path / "s1.json", SCALAR_S1)
    assert main(["classify", str(bad), "--out", str(tmp_path), "--expect", "hyperbolic"]) == 2
    assert main(["classify", str(bad), "--out", str(tmp_path), "--expect", "rejected"]) == 0


def test_deterministic_reports(tmp_path):
    sym = write(tmp_path / "sym.json", SYMMETRIC)
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert main(["classify", str(sym), "--out", str(d), "--seed", "3"]) == 0
        assert main(["verify", str(sym), "--out", str(d), "--seed", "3", "--rays", "1", "--per-ray", "33"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]


def test_kernel_and_verify_oracle(tmp_path):
    red = tmp_path / "red"
    assert main(["reduce", "--beta", "1.5", "--out", str(red)]) == 0
    path = next(red.glob("*.json"))
    assert main(["kernel", str(path), "--t", "1.0", "--grid-points", "512", "--box", "8",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads(next(tmp_path.glob("kernel*.json")).read_text())
    assert doc["decay_fit"]["gamma1"] > 0 and doc["decay_fit"]["r_squared"] >= 0.95
    sym = write(tmp_path / "sym.json", SYMMETRIC)
    assert main(["verify", str(sym), "--out", str(tmp_path), "--oracle", "--rays", "1",
                 "--cross-check", "--oracle-samples", "3"]) == 0
    doc = json.loads(next(tmp_path.glob("verify*.json")).read_text())
    assert doc["holds"] and doc["oracle"]["compared"] > 0


def test_malformed_spec_files(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text('{"alpha": 0.5,\n "P0": [[[0, 0]]],\n "Pnu": [}')
    assert main(["classify", str(broken), "--out", str(tmp_path)]) == 1
    assert "line 3" in capsys.readouterr().err
    both = dict(SCALAR_S1, symmetric=SYMMETRIC["symmetric"])
    with pytest.raises(SpecFileError):
        parse_system(both)
    with pytest.raises(SpecFileError):
        parse_system({"alpha": 0.5, "P0": [[[0, 0]]], "Pnu": [[[[1, 0], [0, 0]]]]})
    with pytest.raises(SpecFileError):
        parse_system({"alpha": 0.5, "symmetric": {"A": [[[0, 1], [2, 0]]], "B": [[0, 0], [0, 0]]}})
    with pytest.raises(SpecFileError):
        parse_system({"P0": [[[0, 0]]], "Pnu": [[[[1, 0]]]]})
    assert main(["classify", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
