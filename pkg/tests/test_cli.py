import csv
import json

import pytest

from toriclab import cli


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_verify_passes(tmp_path, capsys):
    out = str(tmp_path / "verify.csv")
    code = cli.main(["verify", "--output", out])
    captured = capsys.readouterr()
    lines = [l for l in captured.out.splitlines() if l.strip()]
    assert code == 0
    assert len(lines) == 9
    assert all(l.startswith("ok") for l in lines)
    assert _read_rows(out) == [{"checks": "9", "failed": "0"}]


def test_enumerate_known_counts(tmp_path):
    out = str(tmp_path / "enum.csv")
    code = cli.main(["enumerate", "--orientation", "rotated", "--d", "4",
                     "--output", out])
    assert code == 0
    rows = {r["policy"]: r for r in _read_rows(out)}
    for policy in ("best", "worst", "implemented"):
        assert rows[policy]["horizontal_vertical"] == "48"
        assert rows[policy]["diagonal"] == "8"
        assert rows[policy]["total"] == "56"
    assert 56.0 <= float(rows["random"]["total"]) <= 4 * 56.0


def test_model_scalar_ops(tmp_path, capsys):
    out = str(tmp_path / "model.csv")
    assert cli.main(["model", "--op", "threshold-bound", "--output", out]) == 0
    assert capsys.readouterr().out.strip() == "0.0373"
    assert cli.main(["model", "--op", "critical-p", "--output", out]) == 0
    assert capsys.readouterr().out.strip() == "0.1030"


def test_mc_outputs_are_reproducible(tmp_path):
    args = ["mc", "--orientation", "rotated", "--d-list", "4",
            "--p", "0.05", "--eta", "20000", "--seed", "7"]
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    assert cli.main(args + ["--output", a]) == 0
    assert cli.main(args + ["--output", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    row = _read_rows(a)[0]
    assert row["orientation"] == "rotated"
    assert 0.0 < float(row["P"]) < 0.3


def test_sidecar_roundtrip(tmp_path):
    out = str(tmp_path / "pc.csv")
    assert cli.main(["pathcount", "--d-list", "4", "6",
                     "--output", out, "--seed", "5"]) == 0
    config = cli.load_config(out)
    assert config["d_list"] == [4, 6]
    assert config["seed"] == 5
    with open(out + ".json") as fh:
        sidecar = json.load(fh)
    assert sidecar["runtime_seconds"] >= 0.0
    rows = _read_rows(out)
    assert [r["square_exact"] for r in rows] == ["24", "120"]


def test_bad_arguments_exit_config(tmp_path):
    with pytest.raises(SystemExit) as err:
        cli.main(["enumerate", "--orientation", "triangular", "--d", "4"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main(["model", "--op", "xi",
                  "--output", str(tmp_path / "x.csv")])
    assert err.value.code == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = str(tmp_path / "bad.csv")
    code = cli.main(["mc", "--orientation", "rotated", "--d-list", "4",
                     "--p", "0.6", "--eta", "100", "--output", out])
    assert code == 3
    assert "error" in capsys.readouterr().err


def test_walks_to_xi_pipeline(tmp_path):
    ncon_csv = str(tmp_path / "walks.csv")
    assert cli.main(["walks", "--orientation", "rotated", "--d-list", "4",
                     "--samples", "20000", "--output", ncon_csv]) == 0
    lengths = [int(r["l"]) for r in _read_rows(ncon_csv)]
    assert lengths == [4, 6, 8]

    estimates_csv = str(tmp_path / "mc.csv")
    assert cli.main(["mc", "--orientation", "rotated", "--d-list", "4",
                     "--p", "0.03", "0.05", "--eta", "100000",
                     "--output", estimates_csv]) == 0

    xi_csv = str(tmp_path / "xi.csv")
    assert cli.main(["model", "--op", "xi", "--orientation", "rotated",
                     "--d", "4", "--estimates-csv", estimates_csv,
                     "--ncon-csv", ncon_csv, "--complete-ncon",
                     "--output", xi_csv]) == 0
    rows = _read_rows(xi_csv)
    assert len(rows) == 2
    for row in rows:
        assert row["flagged"] == "False"
        assert 1.0 < float(row["xi"]) < 2.0
