import json

from seqplan.cli import main


def test_generate_small(tmp_path):
    assert main(["generate", "small", "--out", str(tmp_path / "small")]) == 0
    names = sorted(p.name for p in (tmp_path / "small").iterdir())
    assert names == ["config.csv", "edges.csv", "od.csv", "pool.csv", "stops.csv"]


def test_generate_toy_edges(tmp_path):
    main(["generate", "toy", "--out", str(tmp_path / "toy")])
    rows = [r for r in (tmp_path / "toy" / "edges.csv").read_text().splitlines() if r and not r.startswith("#")]
    assert len(rows) == 1 + 8


def test_solve_seq_from_directory(tmp_path):
    main(["generate", "small", "--out", str(tmp_path / "small")])
    out = tmp_path / "res"
    assert main(["solve", "--instance", str(tmp_path / "small"), "--approach", "seq", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["approach"] == "seq"
    assert (out / "lineplan.csv").exists() and (out / "schedule.csv").exists()


def test_full_weighted_towards_vehicles_beats_seq(tmp_path):
    totals = {}
    for a in ("seq", "full"):
        out = tmp_path / a
        args = ["solve", "--generate", "small", "--approach", a, "--lambda3", "1000", "--lambda4", "1", "--out", str(out)]
        assert main(args) == 0
        totals[a] = json.loads((out / "report.json").read_text())["total"]
    assert totals["full"] <= totals["seq"] + 1e-6 * totals["seq"]


def test_bad_approach_exits_2(tmp_path, capsys):
    assert main(["solve", "--generate", "small", "--approach", "bogus", "--out", str(tmp_path)]) == 2
    assert "invalid choice" in capsys.readouterr().err


def test_unknown_generator_reports_json(tmp_path, capsys):
    assert main(["solve", "--generate", "nowhere", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert set(err) == {"error", "message"}


def test_missing_instance_dir(tmp_path, capsys):
    assert main(["solve", "--instance", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 2


def test_pos_table(tmp_path, capsys):
    assert main(["pos", "--generate", "small", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "pos.csv").read_text().splitlines()
    assert len(rows) == 1 + 6
    assert rows[-1].startswith("full;")
    assert "seq;" in capsys.readouterr().out


def test_stats(tmp_path, capsys):
    assert main(["stats", "--generate", "small", "--out", str(tmp_path), "--sparsity", str(tmp_path / "nz.csv")]) == 0
    rows = (tmp_path / "stats.csv").read_text().splitlines()
    assert rows[0] == "block;variables;constraints"
    assert rows[1] == "lin;6;9"
    assert rows[-1].startswith("total;")
    assert json.loads((tmp_path / "stats.json").read_text())
    assert (tmp_path / "nz.csv").read_text().count("\n") > 1


def test_solve_twice_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        main(["solve", "--generate", "small", "--approach", "timveh", "--out", str(tmp_path / d)])
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_sweep(tmp_path):
    assert main(["sweep", "--generate", "small", "--lambdas", "0,1,1;0,1,1000", "--out", str(tmp_path)]) == 0
    text = next(tmp_path.glob("*.csv")).read_text().splitlines()
    assert text[0].endswith(";dominated") and len(text) == 3


def test_export_lp(tmp_path):
    lp = tmp_path / "m.lp"
    main(["solve", "--generate", "small", "--approach", "timveh", "--export-lp", str(lp), "--out", str(tmp_path / "o")])
    assert lp.read_text().rstrip().endswith("End")
