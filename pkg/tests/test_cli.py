import json
import subprocess
import sys

import numpy as np

from affw.cli import main


def run_cli(args, tmp_path=None):
    return main(args)


def test_roots_json(tmp_path, capsys):
    rc = main(["roots", "--type", "A2", "--out", str(tmp_path / "r.json")])
    assert rc == 0
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["dual_coxeter"] == 3
    assert data["weyl_order"] == 6
    assert len(data["positive_roots"]) == 3
    assert data["affw_version"]
    assert data["config"]["type"] == "A2"


def test_roots_invalid_type_exit_code():
    assert main(["roots", "--type", "E9"]) == 2


def test_weights_schema(tmp_path):
    rc = main([
        "weights", "--type", "D6", "--p", "11", "--q", "8",
        "--out", str(tmp_path / "w.json"),
    ])
    assert rc == 0
    data = json.loads((tmp_path / "w.json").read_text())
    assert data["p"] == 11 and data["q"] == 8 and data["type"] == "D6"
    assert len(data["labels"]) == 3
    for row in data["labels"]:
        assert set(row) == {"nu", "eta", "wall"}
        assert row["wall"] is None or isinstance(row["wall"], int)


def test_weights_unsupported_type_exit_code(tmp_path):
    assert main(["weights", "--type", "B3", "--p", "7", "--q", "5"]) == 4


def test_weights_validation_exit_code():
    assert main(["weights", "--type", "D6", "--p", "4", "--q", "8"]) == 2


def test_smatrix_integrable_and_fusion_roundtrip(tmp_path):
    spath = tmp_path / "s.json"
    rc = main(["smatrix", "--variant", "integrable", "--type", "A1", "--level", "1",
               "--out", str(spath)])
    assert rc == 0
    data = json.loads(spath.read_text())
    assert data["normalization"] == "unitary"
    assert data["unitarity_residual"] < 1e-10
    m = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
    ref = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.abs(m - ref).max() < 1e-10

    fpath = tmp_path / "f.json"
    rc = main(["fusion", "--from", str(spath), "--out", str(fpath)])
    assert rc == 0
    fdata = json.loads(fpath.read_text())
    assert fdata["vacuum"] == 0
    assert fdata["max_coefficient"] == 1
    # two labels: varpi x varpi = vacuum
    assert {"a": 1, "b": 1, "c": 0, "N": 1} in fdata["coefficients"]


def test_fusion_csv(tmp_path):
    spath = tmp_path / "s.json"
    main(["smatrix", "--variant", "integrable", "--type", "A1", "--level", "2",
          "--out", str(spath)])
    cpath = tmp_path / "f.csv"
    rc = main(["fusion", "--from", str(spath), "--format", "csv", "--out", str(cpath)])
    assert rc == 0
    lines = cpath.read_text().strip().splitlines()
    assert lines[0] == "a,b,c,N"
    assert len(lines) > 3


def test_smatrix_principal(tmp_path):
    spath = tmp_path / "s.json"
    rc = main(["smatrix", "--variant", "principal", "--type", "A1", "--p", "3", "--q", "4",
               "--out", str(spath)])
    assert rc == 0
    data = json.loads(spath.read_text())
    assert len(data["labels"]) == 3
    assert data["unitarity_residual"] < 1e-9


def test_smatrix_subregular_d6(tmp_path):
    spath = tmp_path / "s.json"
    rc = main(["smatrix", "--variant", "subregular", "--type", "D6", "--p", "11", "--q", "8",
               "--out", str(spath)])
    assert rc == 0
    data = json.loads(spath.read_text())
    assert len(data["labels"]) == 3
    assert data["labels"][0]["wall"] in (3, 4)


def test_char_irreducible(tmp_path):
    out = tmp_path / "c.json"
    rc = main(["char", "--type", "A1", "--level", "1", "--order", "6", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["exponent_den"] == 1
    coeffs = {tuple(map(str, [e])): c for e, c in data["coeffs"]}
    assert data["coeffs"][0] == ["0/1", "1/1"]


def test_char_w_vacuum(tmp_path):
    out = tmp_path / "c.json"
    rc = main(["char", "--type", "A2", "--kind", "w-vacuum", "--order", "4", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    got = {e: c for e, c in data["coeffs"]}
    assert got["2/1"] == "1/1" and got["3/1"] == "2/1" and got["4/1"] == "3/1"


def test_char_requires_level_or_pq():
    assert main(["char", "--type", "A1"]) == 2


def test_char_y_spec(tmp_path):
    out = tmp_path / "c.json"
    rc = main(["char", "--type", "A1", "--level", "1", "--order", "4",
               "--y-spec", "1/2", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert "y_series" in data
    assert "0" in data["y_series"]


def test_ope_preset(capsys):
    rc = main(["ope", "--preset", "heisenberg"])
    assert rc == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert data["results"]["central_charge"] == "1"


def test_verify_quick(capsys):
    rc = main(["verify", "--quick"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out and "FAIL" not in out


def test_reproducible_output(tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    main(["roots", "--type", "D4", "--out", str(p1)])
    main(["roots", "--type", "D4", "--out", str(p2)])
    assert p1.read_bytes() == p2.read_bytes()


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "affw.cli", "roots", "--type", "A1"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["dual_coxeter"] == 2
