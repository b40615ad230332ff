import json

import pytest

from harmval import family
from harmval.cli import EXIT_DEGENERATE, EXIT_INPUT, EXIT_IRREGULAR, EXIT_OK, main


def _run(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = main(list(argv) + ["-o", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, doc


def _field_file(tmp_path, p, q, name="field.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"p": {"re": p, "im": [0.0] * len(p)}, "q": {"re": q, "im": [0.0] * len(q)}}))
    return str(path)


def test_solve_cubic(tmp_path):
    code, doc = _run(tmp_path, "solve", _field_file(tmp_path, [-1, 0, 0, 1], [0]))
    assert code == EXIT_OK
    assert doc["result"]["N_F"] == 3
    assert doc["result"]["certified"] is True
    assert doc["meta"]["command"] == "solve"
    assert "version" in doc["meta"]


def test_solve_degenerate(tmp_path, capsys):
    code = main(["solve", _field_file(tmp_path, [0, 1], [0, 1])])
    assert code == EXIT_DEGENERATE
    assert "NonIsolatedZeroSet" in capsys.readouterr().err


def test_solve_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == EXIT_INPUT
    bad.write_text(json.dumps({"p": {"re": [1, 2]}}))
    assert main(["solve", str(bad)]) == EXIT_INPUT
    assert main(["solve", str(tmp_path / "missing.json")]) == EXIT_INPUT


def test_solve_family_file(tmp_path):
    inst = family.build(8, 1 + 0.04j)
    path = tmp_path / "fam8.json"
    path.write_text(json.dumps(inst.field.to_json()))
    code, doc = _run(tmp_path, "solve", str(path))
    assert code == EXIT_OK
    assert doc["result"]["N_F"] >= 38


def test_family_n8(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    code, doc = _run(tmp_path, "family", "--n", "8", "--csv", str(csv_path))
    assert code == EXIT_OK
    res = doc["result"]
    assert res["N_F"] >= 38
    assert res["violated"] == (res["N_F"] > 22)
    assert csv_path.read_text().startswith("n,m,eps,N_F")


def test_family_usage_error(capsys):
    assert main(["family", "--n", "3"]) == EXIT_INPUT
    assert main(["family", "--n", "8", "--bogus"]) == EXIT_INPUT


def test_family_no_regular_instance(tmp_path, monkeypatch):
    real = family.check_regularity

    def never(inst, strict=False):
        rep = real(inst)
        rep.regular = False
        return rep

    monkeypatch.setattr(family, "check_regularity", never)
    code, doc = _run(tmp_path, "family", "--n", "6", "--eps-sweep", "0.01")
    assert code == EXIT_IRREGULAR
    assert doc["result"]["error"] == "no regular instance"


def test_bounds(tmp_path):
    code, doc = _run(tmp_path, "bounds", "--n", "16", "--m", "13")
    assert code == EXIT_OK
    res = doc["result"]
    assert (res["bezout"], res["conjecture"], res["new_total"]) == (256, 202, 406)


def test_random_is_reproducible(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    ca = tmp_path / "a.csv"
    cb = tmp_path / "b.csv"
    assert main(["random", "--n", "1", "--trials", "100", "--seed", "4", "-o", str(a), "--csv", str(ca)]) == 0
    assert main(["--threads", "2", "random", "--n", "1", "--trials", "100", "--seed", "4", "-o", str(b), "--csv", str(cb)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert ca.read_bytes() == cb.read_bytes()
    assert json.loads(a.read_text())["result"]["mean"] == 1.0


def test_levelset(tmp_path):
    code, doc = _run(tmp_path, "levelset", "--n", "8", "--res", "256")
    assert code == EXIT_OK
    res = doc["result"]
    assert len(res["gamma0"]) == 16
    assert res["count"] == res["solver_count_in_window"] == 44


def test_example3d(tmp_path):
    code, doc = _run(tmp_path, "example3d", "--samples", "20000")
    assert code == EXIT_OK
    res = doc["result"]
    assert len(res["circles"]) == 4
    assert res["milnor_bound"] == 196
    assert res["min_F4_on_sphere"] > 0.01


def test_floats_round_trip(tmp_path):
    code, doc = _run(tmp_path, "solve", _field_file(tmp_path, [-2, 0, 1], [0]))
    z = doc["result"]["zeros"][1]["re"]
    assert z == pytest.approx(2**0.5, rel=1e-15)
