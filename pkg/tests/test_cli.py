import json
from pathlib import Path

import pytest

from knapexp.cli import main
from knapexp.model import Instance, dumps_instance, load_instance

HERE = Path(__file__).parent
SAMPLE = Path(__file__).parents[1] / "src" / "knapexp" / "data" / "sample8.json"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def write(tmp_path, inst, name="inst.json", **kw):
    path = tmp_path / name
    path.write_text(dumps_instance(inst, **kw))
    return str(path)


def test_solve_matches_golden_report(capsys):
    code, report = run(capsys, "solve", "--instance", str(SAMPLE))
    assert code == 0
    report.pop("argv")
    golden = json.loads((HERE / "data" / "golden_solve.json").read_text())
    assert report == golden
    assert report["oracle"]["size_bound_holds"]


def test_solve_polynomial_mode(capsys):
    code, report = run(capsys, "solve", "--instance", str(SAMPLE), "--mode", "poly")
    assert code == 0 and report["params"]["beta"] == "5/1"
    assert report["verification"]["feasible"]


def test_malformed_input_exit_code(tmp_path, caplog):
    bad = tmp_path / "bad.json"
    bad.write_text('{"capacity": 5, "items": [{"id": 1, "weight": "x", "profit": "1", '
                   '"lower": "0", "upper": "2", "trivial": false}]}')
    assert main(["solve", "--instance", str(bad)]) == 2
    assert "field 'weight'" in caplog.text
    assert main(["solve", "--instance", str(tmp_path / "missing.json")]) == 2
    assert main(["solve", "--instance", str(SAMPLE), "--epsilon", "2"]) == 2
    assert main(["bogus"]) == 2


def test_verify_exit_codes(tmp_path, capsys):
    inst = Instance.build(4, [(4, 2, 1, 9), (1, 1, None, 1)])
    path = write(tmp_path, inst)
    code, report = run(capsys, "verify", "--instance", path)
    assert code == 1 and report["verification"]["violating_packing"] == [1]
    assert report["oracle"]["agrees"]
    code, report = run(capsys, "verify", "--instance", path, "--query", "1")
    assert code == 0 and report["verification"]["feasible"]
    code, _ = run(capsys, "verify", "--instance", path, "--query", "7")
    assert code == 2


def test_verify_relaxed(tmp_path, capsys):
    inst = Instance.build(4, [(4, 2, 1, 9), (1, 1, None, 1)])
    path = write(tmp_path, inst)
    code, _ = run(capsys, "verify", "--instance", path, "--alpha", "2", "--beta", "9/2")
    assert code == 0


def test_prefix_threshold_handling(tmp_path, capsys):
    inst = load_instance(SAMPLE)[0]
    path = write(tmp_path, inst)
    assert main(["prefix", "--instance", path]) == 2
    assert main(["prefix", "--instance", path, "--threshold", "1"]) == 2
    capsys.readouterr()
    code, report = run(capsys, "prefix", "--instance", path, "--threshold", "100000")
    assert code == 0 and report["result"]["query_set"] == []
    code, report = run(capsys, "prefix", "--instance", path, "--threshold", "133", "--mode", "poly")
    assert code == 0 and report["oracle"]["agrees"]


def test_generate_commands(tmp_path, capsys):
    code, doc = run(capsys, "generate", "sscover")
    assert code == 0 and len(doc["items"]) == 14
    code, doc = run(capsys, "generate", "subsetsum", "--values", "2,3,5", "--target", "5")
    assert code == 0 and len(doc["items"]) == 6 and doc["threshold"] == "103/20"
    assert main(["generate", "subsetsum", "--values", "2,3,5"]) == 2
    capsys.readouterr()
    a = (run(capsys, "generate", "random", "--seed", "7"))[1]
    b = (run(capsys, "generate", "random", "--seed", "7"))[1]
    c = (run(capsys, "generate", "random", "--seed", "8"))[1]
    assert a == b and a != c


def test_generated_subset_sum_round_trip(tmp_path, capsys):
    out = tmp_path / "ss.json"
    assert main(["generate", "subsetsum", "--values", "2,3,5", "--target", "5", "--out", str(out)]) == 0
    code, report = run(capsys, "prefix", "--instance", str(out))
    assert code == 0 and report["result"]["size"] == 1


def test_generate_knapdec(tmp_path, capsys):
    base = write(tmp_path, Instance.build(6, [(3, 4, None, 4), (4, 5, None, 5), (3, 2, None, 2)]))
    code, doc = run(capsys, "generate", "knapdec", "--instance", base, "--threshold", "7",
                    "--beta", "3/2")
    assert code == 0 and len(doc["items"]) == 4
    path = tmp_path / "kd.json"
    path.write_text(json.dumps(doc))
    code, report = run(capsys, "verify", "--instance", str(path), "--beta", "3/2")
    assert code == 1 and report["verification"]["violating_packing"] == [4]


def test_refusal_exit_code(tmp_path, caplog):
    rows = [(100000 + 7 * k, 3 + k % 5, 0, 20 + k) for k in range(23)]
    path = write(tmp_path, Instance.build(2 * 10**6, rows))
    assert main(["solve", "--instance", path, "--no-oracle"]) == 4
    assert "cap" in caplog.text


def test_timings_flag(capsys):
    code, report = run(capsys, "solve", "--instance", str(SAMPLE), "--timings", "--no-oracle")
    assert code == 0 and "timings" in report and report["oracle"] is None
