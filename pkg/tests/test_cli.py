import csv
import io
import json
import math
from pathlib import Path

import pytest

from steiner_exit.cli import dumps, load_polygon, main, polygon_record
from steiner_exit.schedules import side_ratio_step

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_symmetrize_matches_golden(capsys, tmp_path):
    out = tmp_path / "sym.json"
    code, _, err = run(capsys, "symmetrize", "--polygon", DATA / "triangle.json", "--line", DATA / "y_axis.json", "--out", out)
    assert code == 0
    assert "area" in err and "diameter" in err
    assert out.read_text() == (DATA / "triangle_sym.golden.json").read_text()


def test_symmetrize_rectangle_about_axis(capsys):
    code, out, _ = run(capsys, "symmetrize", "--polygon", DATA / "rectangle.json", "--line", DATA / "y_axis.json")
    assert code == 0
    result = sorted(map(tuple, json.loads(out)["vertices"]))
    assert result == sorted(map(tuple, json.loads((DATA / "rectangle.json").read_text())["vertices"]))


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run(capsys, "symmetrize", "--polygon", bad, "--line", DATA / "y_axis.json")
    assert code == 2
    assert out == ""
    assert json.loads(err)["error"] == "UsageError"


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "symmetrize", "--polygon", tmp_path / "nope.json", "--line", DATA / "y_axis.json")
    assert code == 2
    assert "error" in json.loads(err)


def test_degenerate_polygon(capsys, tmp_path):
    p = tmp_path / "flat.json"
    p.write_text('{"vertices": [[0, 0], [1, 0], [2, 0]]}')
    code, _, err = run(capsys, "symmetrize", "--polygon", p, "--line", DATA / "y_axis.json")
    assert code == 2
    assert json.loads(err)["error"] == "DegeneratePolygonError"


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["exitprob"])
    assert exc.value.code == 2


def test_invalid_numeric_argument(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["exitprob", "--polygon", str(DATA / "triangle.json"), "--n", "0"])
    assert exc.value.code == 2


def test_invalid_alpha(capsys):
    code, _, err = run(capsys, "exitprob", "--polygon", DATA / "triangle.json", "--alpha", "2.5", "--n", "10")
    assert code == 2
    assert json.loads(err)["error"] == "ValueError"


def test_polygon_round_trip(tmp_path):
    P = load_polygon(DATA / "triangle.json")
    first = tmp_path / "a.json"
    first.write_text(dumps(polygon_record(P)))
    second = tmp_path / "b.json"
    second.write_text(dumps(polygon_record(load_polygon(first))))
    assert first.read_bytes() == second.read_bytes()


def test_float_formatting():
    assert dumps(0.1) == "0.10000000000000001"
    assert json.loads(dumps({"b": [1.0 / 3], "a": 1})) == {"a": 1, "b": [1.0 / 3]}
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


def test_schedule_rect_csv(capsys):
    code, out, _ = run(capsys, "schedule", "--kind", "rect", "--rect", 2, 1, "--steps", 20, "--format", "csv")
    assert code == 0
    rows = [r for r in csv.DictReader(io.StringIO(out)) if r["kind"] == "rectangle"]
    assert len(rows) == 21
    c = 0.5
    for row in rows[1:]:
        c = side_ratio_step(c)
        assert float(row["c"]) == pytest.approx(c, abs=1e-12)


def test_schedule_triangle_json(capsys):
    code, out, _ = run(capsys, "schedule", "--kind", "triangle", "--polygon", DATA / "triangle.json", "--steps", 6)
    record = json.loads(out)
    assert code == 0
    assert len(record["states"]) == 7
    assert record["params"]["kind"] == "triangle"
    assert record["states"][1]["line"] is not None


def test_schedule_quad(capsys, tmp_path):
    q = tmp_path / "q.json"
    q.write_text('{"vertices": [[0, 0], [3, 0.2], [2.5, 2], [0.3, 1.4]]}')
    code, out, _ = run(capsys, "schedule", "--kind", "quad", "--polygon", q)
    assert code == 0
    assert json.loads(out)["states"][-1]["info"]["kind"] == "rectangle"


def test_exitprob_outside(capsys):
    code, out, _ = run(capsys, "exitprob", "--polygon", DATA / "triangle.json", "--x0", 5, 5, "--n", 100, "--m", 4)
    record = json.loads(out)
    assert code == 0
    assert record["estimates"][0]["p_hat"] == 0
    assert record["params"]["seed"] == record["estimates"][0]["seed"]


def test_exitprob_deterministic_csv(capsys, tmp_path):
    args = ["exitprob", "--polygon", DATA / "rectangle.json", "--t-list", "0.05,0.1", "--n", 2000, "--m", 16, "--alpha", 1.5]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b, "--workers", 2)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(io.StringIO(a.read_text())))
    assert [float(r["t"]) for r in rows] == [0.05, 0.1]
    assert float(rows[0]["p_hat"]) >= float(rows[1]["p_hat"])
    assert {"seed", "alpha", "n", "m", "bridge"} <= set(rows[0])


def test_eigen(capsys, tmp_path):
    sq = tmp_path / "sq.json"
    sq.write_text('{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}')
    code, out, _ = run(capsys, "eigen", "--polygon", sq, "--n", 50000, "--m", 50, "--bridge")
    assert code == 0
    value = json.loads(out)["estimate"]["value"]
    assert value == pytest.approx(math.pi**2, rel=0.1)


def test_eigen_insufficient(capsys, tmp_path):
    sq = tmp_path / "sq.json"
    sq.write_text('{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}')
    code, _, err = run(capsys, "eigen", "--polygon", sq, "--n", 50, "--m", 4, "--t1", 1, "--t2", 2)
    assert code == 2
    assert json.loads(err)["error"] == "InsufficientSamplesError"


def test_verify_default_suite(capsys):
    code, out, err = run(capsys, "verify", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["passed"] == "True" for r in rows)
    assert "FAIL" not in err
