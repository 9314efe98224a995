import json

import pytest

from hardytree.cli import main
from hardytree.hardy import TreeFunction, extremal_fw, save_function
from hardytree.selfmaps import map_halving_phi4, map_to_json
from hardytree.tree import TreeParams, Vertex
from hardytree.verify import example1_function


def run(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    out = capsys.readouterr()
    return exc.value.code, out.out, out.err


@pytest.fixture
def q2():
    return TreeParams(2)


def test_norm_extremal_file(tmp_path, capsys, q2):
    for p in ["1", "2", "3"]:
        path = tmp_path / f"fw{p}.json"
        save_function(extremal_fw(q2, Vertex((2, 0, 1)), float(p), 4), path)
        code, out, _ = run(capsys, "norm", str(path), "--p", p, "--out", "json")
        assert code == 0
        assert json.loads(out)["sup"] == pytest.approx(1.0, abs=1e-12)


def test_norm_zero_and_example1(tmp_path, capsys, q2):
    zero = tmp_path / "zero.json"
    save_function(TreeFunction.zeros(q2, 3), zero)
    code, out, _ = run(capsys, "norm", str(zero))
    assert code == 0 and "norm = 0.0" in out
    ex1 = tmp_path / "ex1.json"
    save_function(example1_function(q2, 6, 1.0), ex1)
    code, out, _ = run(capsys, "norm", str(ex1), "--p", "1", "--out", "json")
    assert json.loads(out)["sup"] == pytest.approx(1.0, abs=1e-12)
    code, out, _ = run(capsys, "norm", str(ex1), "--p", "1", "--out", "csv")
    rows = out.strip().splitlines()
    assert rows[0] == "level,M_p" and len(rows) == 8


def test_norm_errors(tmp_path, capsys):
    code, _, err = run(capsys, "norm", str(tmp_path / "missing.json"))
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"q": 2,\n "depth": 1,\n "entries": [oops]}')
    code, _, err = run(capsys, "norm", str(bad))
    assert code == 2 and "line 3" in err
    code, _, _ = run(capsys, "norm", str(bad), "--p", "0.5")
    assert code == 2


def test_opnorm_examples(capsys):
    code, out, _ = run(capsys, "opnorm", "--map", "parent", "--q", "2", "--p", "1", "--depth", "8", "--out", "json")
    data = json.loads(out)
    assert code == 0 and data["lower"] == data["upper"] == 1.0
    code, out, _ = run(capsys, "opnorm", "--map", "shift:0.1", "--q", "2", "--p", "1", "--depth", "6", "--out", "json")
    data = json.loads(out)
    assert data["lower"] == pytest.approx(6.0, abs=1e-12) and data["formula_value"] == pytest.approx(6.0)
    code, out, _ = run(capsys, "opnorm", "--map", "collapse", "--q", "2", "--p", "1", "--depth", "8")
    assert "unbounded-trend" in out
    assert "1, 3, 6, 12, 24, 48, 96, 192, 384" in out
    code, out, _ = run(capsys, "opnorm", "--map", "child", "--p", "inf", "--out", "json")
    assert json.loads(out)["upper"] == 1.0


def test_opnorm_csv_and_map_file(tmp_path, capsys, q2):
    path = tmp_path / "halving.json"
    path.write_text(json.dumps(map_to_json(map_halving_phi4(q2, 5))))
    code, out, _ = run(capsys, "opnorm", "--map", f"file:{path}", "--depth", "5", "--out", "csv")
    assert code == 0
    assert out.splitlines()[0] == "n,fw_lower_pow,oracle_pow,S"
    code, _, err = run(capsys, "opnorm", "--map", f"file:{path}", "--depth", "7")
    assert code == 2 and "error" in err


def test_opnorm_usage_errors(capsys):
    assert run(capsys, "opnorm", "--map", "nonsense")[0] == 2
    assert run(capsys, "opnorm", "--q", "0")[0] == 2
    assert run(capsys, "opnorm", "--map", "shift:9", "--q", "2")[0] == 2


def test_diagnose_examples(capsys):
    code, out, _ = run(capsys, "diagnose", "--map", "halving", "--q", "3", "--depth", "12", "--out", "json")
    data = json.loads(out)
    assert code == 0 and data["verdict"].startswith("consistent with compact")
    assert data["decay_sequence"]["1"] == "1/3" and data["decay_sequence"]["6"] == "1/729"
    code, out, _ = run(capsys, "diagnose", "--map", "parent")
    assert "not compact (displacement bounded)" in out
    code, out, _ = run(capsys, "diagnose", "--map", "child", "--out", "json")
    data = json.loads(out)
    assert data["verdict"].startswith("not compact") and data["boundedness_trend"] == "bounded-trend"
    code, out, _ = run(capsys, "diagnose", "--map", "clamp:2", "--out", "csv")
    assert out.splitlines()[0].startswith("level,disp_min")


def test_verify_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "q1-bound", "--suite", "table", "--seed", "3")
    assert code == 0 and "checks passed" in out
    code, out, _ = run(capsys, "verify", "--suite", "q1-bound", "--out", "json")
    data = json.loads(out)
    assert data["passed"] and all(c["suite"] == "q1-bound" for c in data["checks"])
    assert run(capsys, "verify", "--suite", "nope")[0] == 2
    assert run(capsys, "verify", "--p", "inf")[0] == 2


def test_verify_failure_exit_code(capsys, monkeypatch):
    from hardytree import verify
    from hardytree.verify import CheckResult

    monkeypatch.setitem(verify.SUITES, "growth",
                        lambda cfg: [CheckResult("growth", "forced", False, "forced failure", {})])
    code, out, _ = run(capsys, "verify", "--suite", "growth")
    assert code == 1 and "FAIL" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "growth", "--suite", "norm-axioms", "--seed", "7", "--out", "json"],
    ["diagnose", "--map", "shift:1.2", "--q", "3", "--depth", "5", "--out", "json"],
])
def test_reproducible_reports(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
