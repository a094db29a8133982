import csv
import io
import json

import numpy as np
import pytest

from rankbound import states as S
from rankbound.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def bounds_csv(capsys, *extra):
    code, out, _ = run(capsys, "bounds", "--format", "csv", *extra)
    assert code == 0
    return list(csv.DictReader(io.StringIO(out)))


def test_bounds(capsys):
    rows = bounds_csv(capsys, "--dim", "2", "--rank", "3")
    assert rows[0]["lin_bound_exact"] == "5/6" and float(rows[0]["conc_bound"]) == 0.25
    rows = bounds_csv(capsys, "--dim", "2", "--rank", "2")
    assert float(rows[0]["conc_bound"]) == 0.5
    rows = bounds_csv(capsys, "--dim", "3", "--rank", "9")
    assert float(rows[0]["lin_bound"]) == 0.9375 and rows[0]["conc_bound"] == ""
    assert len(bounds_csv(capsys, "--dim", "2")) == 3
    code, out, _ = run(capsys, "bounds", "--dim", "2", "--format", "json")
    assert [r["lin_bound_exact"] for r in json.loads(out)] == ["2/3", "5/6", "8/9"]
    code, out, _ = run(capsys, "bounds", "--dim", "2", "--rank", "4")
    assert code == 0 and "8/9" in out


@pytest.mark.parametrize("argv", [["bounds", "--dim", "2", "--rank", "7"], ["bounds"], ["nope"],
                                  ["bounds", "--dim", "x"], ["make", "--family", "werner", "--rank", "5", "--p", "0.5"],
                                  ["make", "--family", "werner", "--rank", "4"], ["sweep", "--rank", "4", "--steps", "1"]])
def test_usage_errors_exit_1(capsys, argv):
    code = main(argv) if argv[0] != "nope" and argv != ["bounds"] and argv[-1] != "x" else None
    if code is None:
        with pytest.raises(SystemExit) as e:
            main(argv)
        code = e.value.code
    assert code == 1


def test_make_and_measures(tmp_path, capsys):
    path = tmp_path / "w.json"
    assert main(["make", "--family", "werner", "--rank", "4", "--p", "0.5", "--out", str(path)]) == 0
    np.testing.assert_allclose(S.load_state(path).eig().values, [0.625, 0.125, 0.125, 0.125], atol=1e-15)
    code, out, _ = run(capsys, "measures", str(path), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["measures"]["fidelity"] == pytest.approx(0.75) and d["verdict"]["useful"]
    code, out, _ = run(capsys, "measures", str(path), "--fef", "both", "--format", "json", "--restarts", "8")
    assert json.loads(out)["fef_gap"] <= 1e-9
    code, out, _ = run(capsys, "measures", str(path))
    assert "fidelity" in out and "useful" in out

    mems_path = tmp_path / "m.json"
    assert main(["make", "--family", "mems", "--spectrum", "0.5,0.25,0.25,0", "--out", str(mems_path)]) == 0
    np.testing.assert_allclose(S.load_state(mems_path).eig().values, [0.5, 0.25, 0.25, 0], atol=1e-15)

    mixed = tmp_path / "mm.json"
    assert main(["make", "--family", "mixed", "--out", str(mixed)]) == 0
    code, out, _ = run(capsys, "measures", str(mixed), "--format", "json")
    assert json.loads(out)["verdict"]["useful"] is False

    code, out, _ = run(capsys, "make", "--family", "random", "--rank", "2", "--seed", "4")
    assert code == 0 and S.from_payload(json.loads(out)).rank() == 2


def test_measures_bad_state_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    payload = S.to_payload(S.maximally_mixed(2))
    payload["re"] = (0.9 * np.eye(4) / 4).tolist()
    bad.write_text(json.dumps(payload))
    code, _, err = run(capsys, "measures", str(bad))
    assert code == 2 and "trace" in err
    (tmp_path / "junk.json").write_text("[")
    assert main(["measures", str(tmp_path / "junk.json")]) == 2
    assert main(["measures", str(tmp_path / "missing.json")]) == 2


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--rank", "4", "--steps", "4", "--out", str(out)]) == 0
    text = out.read_bytes()
    assert b"\r" not in text
    rows = list(csv.DictReader(io.StringIO(text.decode())))
    assert list(rows[0]) == ["p", "rank", "concurrence", "fidelity", "singlet_fraction", "linear_entropy", "vn_entropy"]
    r13 = rows[1]
    assert float(r13["p"]) == pytest.approx(1 / 3)
    assert float(r13["fidelity"]) == pytest.approx(2 / 3, abs=1e-12) and float(r13["concurrence"]) == pytest.approx(0, abs=1e-12)
    code, text, _ = run(capsys, "sweep", "--rank", "2", "--steps", "5")
    row0 = list(csv.DictReader(io.StringIO(text)))[0]
    assert float(row0["singlet_fraction"]) == pytest.approx(0.5, abs=1e-12)
    assert float(row0["fidelity"]) == pytest.approx(2 / 3, abs=1e-12)
    assert float(row0["concurrence"]) == pytest.approx(0.5, abs=1e-12)
    code, text, _ = run(capsys, "sweep", "--rank", "3", "--steps", "5")
    row = list(csv.DictReader(io.StringIO(text)))[1]
    assert float(row["fidelity"]) == pytest.approx(2 / 3, abs=1e-12) and float(row["concurrence"]) == pytest.approx(0.25, abs=1e-12)
    assert main(["sweep", "--rank", "4", "--out", str(tmp_path / "no" / "dir" / "x.csv")]) == 1


def test_verify(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--claims", "eq9_dominates,vn_bound", "--rank", "3",
                       "--trials", "500", "--seed", "7", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "eq9_dominates_r3.json").read_text())
    assert rep["violations"] == 0 and rep["trials"] == 500 and rep["seed"] == 7
    assert (tmp_path / "vn_bound_r3.json").exists()
    code, _, _ = run(capsys, "verify", "--claims", "conc_bound_state", "--rank", "2", "--trials", "500",
                     "--out", str(tmp_path))
    assert code == 0
    code, _, _ = run(capsys, "verify", "--claims", "conc_bound_state", "--rank", "2", "--trials", "500",
                     "--mode", "assert", "--out", str(tmp_path))
    assert code == 3
    assert main(["verify", "--claims", "fid_upper_r3", "--rank", "4", "--out", str(tmp_path)]) == 1
    assert main(["verify", "--claims", "bogus", "--rank", "4", "--out", str(tmp_path)]) == 1


def test_search_cli(tmp_path):
    out = tmp_path / "s.json"
    assert main(["search", "--claim", "conc_bound_state", "--rank", "2", "--restarts", "2", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["found"] and d["margin"] > 0


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit):
        main(["verify", "--help"])
    out = capsys.readouterr().out
    for flag in ("--claims", "--rank", "--trials", "--seed", "--mode", "--out", "--workers"):
        assert flag in out
