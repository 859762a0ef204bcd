from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tsow.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_list(capsys):
    code, doc = run_json(capsys, "list")
    assert code == 0
    assert [p["problem"] for p in doc["result"]["problems"]] == ["grover", "dj", "bv", "simon"]
    assert doc["schema"] == "tsow/1"


def test_simulate_extended(capsys):
    code, doc = run_json(capsys, "simulate", "grover", "--n", "2", "--setting", "01")
    assert code == 0
    r = doc["result"]
    assert r["queries"] == 1 and r["outcomes"] == {"01": pytest.approx(1)}


def test_simulate_random_setting_recorded(capsys):
    _, a = run_json(capsys, "simulate", "grover", "--n", "3", "--setting", "random", "--seed", "4")
    _, b = run_json(capsys, "simulate", "grover", "--n", "3", "--setting", "random", "--seed", "4")
    assert a == b
    assert a["rng"] == {"bit_generator": "PCG64", "library": "numpy", "seed": 4}


def test_simulate_relativized_dj(capsys):
    code, doc = run_json(capsys, "simulate", "dj", "--n", "2")
    assert code == 0
    r = doc["result"]
    assert r["queries"] == 1
    assert all(v == pytest.approx(1) for v in r["per_setting_success"].values())
    assert len(r["per_setting_success"]) == 8


def test_simulate_simon(capsys):
    code, doc = run_json(capsys, "simulate", "simon", "--n", "2", "--seed", "0")
    assert code == 0
    assert doc["result"]["all_recovered"]
    assert all(s["recovered"] == s["solution"] for s in doc["result"]["settings"])


def test_simulate_dump_states(capsys):
    code, out = run(capsys, "simulate", "grover", "--n", "2", "--dump-states")
    assert code == 0
    assert "0000\t0.5\t" in out and "1111\t0.5\t" in out


def test_predict_gf2(capsys):
    code, doc = run_json(capsys, "predict", "grover", "--n", "2", "--mode", "gf2-linear")
    assert code == 0
    assert doc["result"]["global_prediction"] == 1
    assert all(len(s["instances"]) == 3 for s in doc["result"]["settings"])


def test_compare_grover4_csv(capsys):
    code, out = run(capsys, "compare", "grover", "--n", "4", "--format", "csv")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.startswith("problem,n,mode,classical_depth,predicted_quantum")
    assert row.startswith("grover-4,4,coordinate,15,3,3,")


def test_compare_byte_identical(capsys):
    outs = [run(capsys, "compare", "dj", "--n", "2", "--format", "json")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_verify_grover(capsys):
    code, doc = run_json(capsys, "verify", "grover", "--n", "2")
    assert code == 0 and doc["result"]["passed"]


def test_probe(capsys):
    code, doc = run_json(capsys, "probe-simon", "--n", "2")
    assert code == 0
    assert doc["result"]["oracle_agreement"] is True


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out = run(capsys, "predict", "dj", "--n", "2", "--format", "json", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"]["global_prediction"] == 1


def test_problem_file(capsys, tmp_path):
    doc = {
        "name": "pair",
        "setting_width": 2,
        "encoding": "compact",
        "settings": ["00", "11"],
        "domain": ["0", "1"],
        "answers": {"00": ["0", "0"], "11": ["1", "1"]},
        "solutions": {"00": "0", "11": "1"},
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    code, out = run_json(capsys, "compare", "--problem-file", str(path))
    assert code == 0
    row = out["result"]["rows"][0]
    assert row["classical_depth"] == 1 and row["simulated_quantum_queries"] is None
    code, err = run_json(capsys, "simulate", "--problem-file", str(path))
    assert code == 2 and err["error"]["code"] == "CONFIG"


@pytest.mark.parametrize(
    "argv,code,err",
    [
        (["simulate", "nope"], 2, "CONFIG"),
        (["simulate", "grover", "--n", "2", "--setting", "111"], 2, "CONFIG"),
        (["simulate", "grover", "--n", "20"], 2, "SIZE_LIMIT"),
        (["predict", "dj", "--mode", "gf2-linear"], 2, "CONFIG"),
        (["predict", "grover", "--mode", "bogus"], 2, "CONFIG"),
        (["frobnicate"], 2, "CONFIG"),
    ],
)
def test_error_objects(capsys, argv, code, err):
    got, out = run(capsys, *argv)
    assert got == code
    doc = json.loads(out)
    assert doc["error"]["code"] == err and doc["schema"] == "tsow/1"


def test_bad_problem_file(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"name": "x"}))
    got, out = run(capsys, "predict", "--problem-file", str(path))
    assert got == 2
    assert json.loads(out)["error"]["key"] == "setting_width"


def test_layout_errors_exit_3(capsys, monkeypatch):
    import tsow.cli as cli
    from tsow.errors import CalibrationFailedError

    def boom(*a, **k):
        raise CalibrationFailedError("forced")

    monkeypatch.setattr(cli, "build_for", boom)
    got, out = run(capsys, "simulate", "grover", "--n", "3")
    assert got == 3 and json.loads(out)["error"]["code"] == "CALIBRATION_FAILED"


def test_contract_failure_exit_4(capsys, monkeypatch):
    import tsow.cli as cli
    from tsow.verify import Check

    monkeypatch.setattr(cli, "verify_problem", lambda *a: [Check("bob_invariance", False, 0.5)])
    got, out = run(capsys, "verify", "grover", "--n", "2", "--format", "json")
    assert got == 4
    assert json.loads(out.split("\n}\n", 1)[1])["error"]["code"] == "CONTRACT"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tsow", "list", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("problem,")
