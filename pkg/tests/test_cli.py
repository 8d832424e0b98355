import json

import pytest

from rigidcoh.cli import main

AFFINE = "p = 5\nvars x\nrelations none\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_affine_line_report(tmp_path, capsys):
    problem = write(tmp_path, "a.txt", AFFINE)
    out_json = tmp_path / "a.json"
    code, text, _ = run_cli(["--problem", problem, "--oracle", "--json", str(out_json)], capsys)
    assert code == 0
    assert "Betti numbers: h0=1 h1=0" in text
    report = json.loads(out_json.read_text())
    assert report["schema"] == "rigidcoh.report/1"
    assert report["betti"] == [1, 0]
    assert report["oracle"]["agrees"]
    assert report["precision_check"]["unchanged"]
    assert [c["degree"] for c in report["certificates"]] == [0, 1]
    assert all(c["stable"] for c in report["certificates"])
    assert {"D", "nMax", "mMax", "N", "e", "c0", "gamma"} <= report["accepted_point"].keys()


def test_gm_report(tmp_path, capsys):
    problem = write(tmp_path, "gm.txt", "p = 7\nvars x, y\nrelations x*y - 1\nD 6, 8\nnMax 3\nmMax 1, 2\n")
    code, text, _ = run_cli(["--problem", problem, "--json", "-", "--oracle"], capsys)
    assert code == 0
    report = json.loads(text[text.index("{"):])
    assert report["betti"] == [1, 1, 0]
    assert [row["lim1"] for row in report["lim_table"]] == [0, 0, 0]


def test_reports_are_deterministic(tmp_path, capsys):
    problem = write(tmp_path, "a.txt", AFFINE)
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert run_cli(["--problem", problem, "--json", str(path)], capsys)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_parse_error_location(tmp_path, capsys):
    problem = write(tmp_path, "bad.txt", "p = 5\nvars x\nrelations x*^2\n")
    code, _, err = run_cli(["--problem", problem], capsys)
    assert code == 4
    assert "parse error" in err and "line 3, column 13" in err


def test_not_stabilized(tmp_path, capsys):
    problem = write(tmp_path, "t.txt", "p = 7\nvars x, y\nrelations x*y - 1\nD 1\nnMax 1\nmMax 1\n")
    code, text, _ = run_cli(["--problem", problem], capsys)
    assert code == 2
    assert "not_stabilized" in text


def test_precision_sensitive(tmp_path, capsys):
    # one p-adic digit cannot separate the relation from its reduction
    problem = write(tmp_path, "n1.txt", "p = 7\nvars x, y\nrelations x*y - 7\nD 6, 8\nnMax 2\nmMax 1\nN 1\n")
    code, text, _ = run_cli(["--problem", problem], capsys)
    assert code == 3
    assert "precision_sensitive" in text


def test_schedule_file_and_overrides(tmp_path, capsys):
    problem = write(tmp_path, "a.txt", AFFINE)
    sched = write(tmp_path, "s.json", json.dumps({"D": [4, 6], "nMax": [2], "mMax": [1]}))
    code, text, _ = run_cli(["--problem", problem, "--schedule", sched, "--mode", "exact", "--json", "-"], capsys)
    assert code == 0
    report = json.loads(text[text.index("{"):])
    assert [pt["D"] for pt in report["schedule"]] == [4, 6]
    assert report["problem"]["mode"] == "exact"
    assert "precision_check" not in report

    points = write(tmp_path, "p.json", json.dumps([{"D": 4, "nMax": 2, "mMax": 1}, {"D": 5, "nMax": 2, "mMax": 1}]))
    code, text, _ = run_cli(["--problem", problem, "--schedule", points, "--levels", "2", "--json", "-"], capsys)
    assert code == 0
    report = json.loads(text[text.index("{"):])
    assert [pt["mMax"] for pt in report["schedule"]] == [2, 2]


def test_bad_schedule_and_missing_file(tmp_path, capsys):
    problem = write(tmp_path, "a.txt", AFFINE)
    sched = write(tmp_path, "s.json", "[1, 2")
    assert run_cli(["--problem", problem, "--schedule", sched], capsys)[0] == 1
    assert run_cli(["--problem", str(tmp_path / "missing.txt")], capsys)[0] == 1


def test_single_level_mode(capsys):
    code, text, _ = run_cli(["--corpus", "affine_line", "--cone", "single"], capsys)
    assert code == 0
    assert "cone: single" in text


def test_timing_flag(capsys):
    code, text, _ = run_cli(["--corpus", "affine_line", "--timing", "--json", "-"], capsys)
    assert code == 0
    assert "timing_seconds" in json.loads(text[text.index("{"):])


def test_requires_a_problem(capsys):
    with pytest.raises(SystemExit):
        main([])
