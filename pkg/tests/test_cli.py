import json

import pytest

from ecpcheck.cli import main, write_atomic

CAD_TEXT = "canvas 100 100\nmembership cad\ncomponent 1 relay 0 0 10 10\ncomponent 2 fuse 20 0 30 10\n"
NET_TEXT = CAD_TEXT.replace("membership cad", "membership net")


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return put


def test_identical_layouts_exit_zero(files, capsys):
    code = main(["check", "--cad", files("c.txt", CAD_TEXT), "--net", files("n.txt", NET_TEXT)])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: compliant" in out and "absent: none" in out and "excess: none" in out


def test_same_file_for_both_sides(files):
    p = files("c.txt", CAD_TEXT)
    assert main(["check", "--cad", p, "--net", p]) == 0


def test_missing_component_exit_one(files, tmp_path):
    net = "canvas 100 100\nmembership net\ncomponent 1 relay 0 0 10 10\n"
    out = tmp_path / "r.json"
    code = main(["check", "--cad", files("c.txt", CAD_TEXT), "--net", files("n.txt", net),
                 "--format", "json", "--out", str(out)])
    report = json.loads(out.read_text())
    assert code == 1
    assert report["schema_version"] == 1 and report["verdict"] == "non_compliant"
    assert report["absent"] == [{"label": "fuse", "id": 2}] and report["excess"] == []
    assert report["cost"] == {"U": 1, "V": 1, "D": 0}


def test_malformed_facts_exit_two(files, capsys):
    assert main(["check", "--facts", files("f.lp", 'object("relay",1,0,0,10).\n')]) == 2
    assert "arity mismatch" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check"],
    ["check", "--cad", "/nonexistent/file"],
    ["check", "--cad", "/nonexistent/a", "--net", "/nonexistent/b"],
])
def test_usage_errors_exit_two(argv):
    assert main(argv) == 2


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as e:
        main(["check", "--format", "yaml"])
    assert e.value.code == 2


def test_detection_net_file(files, capsys):
    dets = "canvas 100 100\ndetection relay 0 0 10 10 0.9\ndetection fuse 20 0 30 10 0.4\n"
    c, n = files("c.txt", CAD_TEXT), files("d.txt", dets)
    assert main(["check", "--cad", c, "--net", n]) == 1
    assert main(["check", "--cad", c, "--net", n, "--score-threshold", "0.3"]) == 0


def test_warnings_never_change_exit_code(files, capsys):
    cad = "canvas 100 100\nmembership cad\ncomponent 1 p 0 0 10 10\ncomponent 2 l 20 0 30 10\n"
    net = "canvas 100 100\nmembership net\ncomponent 11 l 0 0 10 10\ncomponent 12 p 20 0 30 10\n"
    code = main(["check", "--cad", files("c.txt", cad), "--net", files("n.txt", net), "--displacement-warn", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("warning: order violation") == 2 and out.count("warning: displacement") == 2


def test_fact_file_check_matches_layout_check(files, tmp_path, capsys):
    c, n = files("c.txt", CAD_TEXT), files("n.txt", NET_TEXT.replace("20 0 30 10", "40 0 50 10"))
    assert main(["emit-asp", "--cad", c, "--net", n, "--out", str(tmp_path / "asp")]) == 0
    main(["check", "--cad", c, "--net", n, "--format", "json", "--out", str(tmp_path / "a.json")])
    main(["check", "--facts", str(tmp_path / "asp" / "instance.lp"), "--format", "json",
          "--out", str(tmp_path / "b.json")])
    a, b = (json.loads((tmp_path / f).read_text()) for f in ("a.json", "b.json"))
    assert a["cost"] == b["cost"] and a["mapping"] == b["mapping"]
    assert (tmp_path / "asp" / "program.lp").exists()


def test_gen_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["gen", "--labels", "6", "--components", "12", "--seed", "1", "--drop", "1",
                     "--out", str(tmp_path / d)]) == 0
    for f in ("cad.txt", "net.txt"):
        assert (tmp_path / "a" / f).read_text() == (tmp_path / "b" / f).read_text()


def test_gen_infeasible_exit_two(tmp_path):
    assert main(["gen", "--labels", "2", "--components", "500", "--out", str(tmp_path)]) == 2


def test_metrics_perfect_self_detection(files, capsys):
    gt = files("g.txt", CAD_TEXT)
    pred = files("p.txt", NET_TEXT.replace("10 10\n", "10 10 0.9\n").replace("30 10\n", "30 10 0.8\n"))
    assert main(["metrics", "--cad", gt, "--net", pred, "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["map"] == 1 and report["mar"] == 1


def test_metrics_csv_and_bad_iou(files, capsys):
    gt = files("g.txt", CAD_TEXT)
    assert main(["metrics", "--cad", gt, "--net", gt, "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("kind,label")
    assert main(["metrics", "--cad", gt, "--net", gt, "--iou", "1"]) == 2


def test_bench_writes_csvs(tmp_path, capsys):
    assert main(["bench", "--labels", "6", "--components", "12", "--samples", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "records.csv").read_text().startswith("n_labels,n_components,sample,wall_ms,U,V,D,optimal")
    assert len((tmp_path / "summary.csv").read_text().splitlines()) == 3


def test_emit_asp_cross_check_without_solver(files, monkeypatch):
    monkeypatch.delenv("ECPCHECK_ASP_SOLVER", raising=False)
    c = files("c.txt", CAD_TEXT)
    assert main(["emit-asp", "--cad", c, "--net", c, "--cross-check"]) == 2


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "x.txt"
    write_atomic(target, "one")
    write_atomic(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["x.txt"]
