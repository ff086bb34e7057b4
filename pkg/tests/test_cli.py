import json

import pytest

from vpindex.cli import main


@pytest.fixture
def files(tmp_path):
    ex1 = tmp_path / "ex1.json"
    ex1.write_text('{"m":3,"k":3,"receivers":[[1],[2],[3]]}')
    chain = tmp_path / "chain.json"
    chain.write_text('{"m":3,"k":2,"receivers":[[],[1],[1,2],[1,3]]}')
    return tmp_path, ex1, chain


def test_solve_and_verify(files, capsys):
    tmp, ex1, chain = files
    cb = tmp / "cb.json"
    assert main(["solve", "--instance", str(ex1), "--out", str(cb)]) == 0
    assert "t=7 rate=1.7712 certified=true" in capsys.readouterr().out
    assert main(["verify", "--instance", str(ex1), "--codebook", str(cb)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_solve_incumbent_exit_code(files, capsys):
    tmp, ex1, _ = files
    rc = main(["solve", "--instance", str(ex1), "--k", "4", "--node-limit", "3", "--out", str(tmp / "cb.json")])
    assert rc == 2
    assert "certified=false" in capsys.readouterr().out


def test_verify_tampered(files, capsys):
    tmp, ex1, _ = files
    cb = tmp / "cb.json"
    main(["solve", "--instance", str(ex1), "--out", str(cb)])
    doc = json.loads(cb.read_text())
    moved = doc["codewords"][0]["realisations"].pop()
    doc["codewords"][1]["realisations"].append(moved)
    doc["codewords"][1]["realisations"].sort()
    bad = tmp / "bad.json"
    bad.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["verify", "--instance", str(ex1), "--codebook", str(bad)]) == 3
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] is False and "receiver" in out and "side_info" in out


def test_verify_wrong_instance(files, capsys):
    tmp, ex1, chain = files
    cb = tmp / "cb.json"
    main(["solve", "--instance", str(ex1), "--out", str(cb)])
    assert main(["verify", "--instance", str(chain), "--k", "3", "--codebook", str(cb)]) == 3


def test_verify_schema_mismatch(files, capsys):
    tmp, ex1, _ = files
    bad = tmp / "bad.json"
    bad.write_text('{"m":3,"k":3}')
    assert main(["verify", "--instance", str(ex1), "--codebook", str(bad)]) == 4
    bad.write_text('{"m":3,"k":3,"t":1,"codewords":[{"id":0,"realisations":[[0,0,0]]}],"decoders":[]}')
    assert main(["verify", "--instance", str(ex1), "--codebook", str(bad)]) == 4


def test_input_errors(files, capsys):
    tmp, ex1, _ = files
    bad = tmp / "full.json"
    bad.write_text('{"m":2,"k":2,"receivers":[[1,2]]}')
    assert main(["solve", "--instance", str(bad)]) == 4
    assert "H = [1:m]" in capsys.readouterr().err
    assert main(["solve", "--instance", str(tmp / "missing.json")]) == 4
    assert main(["nonsense"]) == 4


def test_sweep_chain(files, capsys):
    _, _, chain = files
    assert main(["sweep", "--instance", str(chain), "--k", "2", "--kmax", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = [dict(zip(lines[0].split(","), line.split(","))) for line in lines[1:]]
    assert [(r["k"], r["t_vp"], r["alpha_k"], r["t_pliable"], r["beta_k"]) for r in rows] == [
        ("2", "4", "2.0000", "4", "2.0000"),
        ("3", "9", "2.0000", "9", "2.0000"),
    ]


def test_sweep_empty_range(files, capsys):
    _, ex1, _ = files
    assert main(["sweep", "--instance", str(ex1), "--k", "3", "--kmax", "2"]) == 0
    assert capsys.readouterr().out.strip().count("\n") == 0


def test_sweep_json_and_timing(files, capsys):
    _, ex1, _ = files
    assert main(["sweep", "--instance", str(ex1), "--k", "2", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rows"][0]["t_vp"] == 4 and doc["instance"]["receivers"] == [[1], [2], [3]]
    assert main(["sweep", "--instance", str(ex1), "--k", "2", "--timing"]) == 0
    assert "wall_time" in capsys.readouterr().out


def test_bounds_table(files, capsys):
    _, ex1, chain = files
    assert main(["bounds", "--instance", str(ex1), "--k", "4", "--check-edges"]) == 0
    out = capsys.readouterr().out
    assert "singleton  yes               16         4      4" in out
    assert "largest maximal fiber: 6" in out
    assert main(["bounds", "--instance", str(chain), "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {"bound": "chained", "applicable": True, "fiber_cap": 2, "t_lower": "4", "t_lower_ceil": 4} in rows


def test_linear_commands(files, capsys):
    tmp, ex1, chain = files
    assert main(["linear-check", "--instance", str(ex1), "--q", "2", "--matrix", "1,1,0;0,1,1",
                 "--out", str(tmp / "lin.json")]) == 0
    assert "choice 1:2,2:1,3:1" in capsys.readouterr().out
    assert main(["verify", "--instance", str(ex1), "--k", "2", "--codebook", str(tmp / "lin.json")]) == 0
    assert main(["linear-check", "--instance", str(ex1), "--q", "2", "--matrix", "1,1,1"]) == 3
    assert main(["linear-check", "--instance", str(ex1), "--q", "2", "--matrix", "1,2,0"]) == 4
    capsys.readouterr()
    assert main(["linear-search", "--instance", str(chain), "--q", "2"]) == 0
    assert "T=2 rate=2.0000 matrix=0,1,0;0,0,1" in capsys.readouterr().out
    assert main(["linear-search", "--instance", str(ex1), "--q", "3", "--tmax", "1"]) == 3


def test_concat_command(files, capsys):
    tmp, ex1, _ = files
    cb = tmp / "cb.json"
    main(["solve", "--instance", str(ex1), "--out", str(cb)])
    capsys.readouterr()
    assert main(["concat", "--codebook", str(cb), "--mode", "double", "--out", str(tmp / "cb6.json")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert (info["k"], info["t"], info["t_raw"]) == (6, 28, 28)
    assert main(["concat", "--codebook", str(cb), "--mode", "general", "--p", "1", "--field", "3",
                 "--out", str(tmp / "cb9.json")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert (info["k"], info["t"], info["rate"]) == (9, 63, 1.8856)
    inst6 = tmp / "ex1k6.json"
    inst6.write_text('{"m":3,"k":6,"receivers":[[1],[2],[3]]}')
    assert main(["verify", "--instance", str(inst6), "--codebook", str(tmp / "cb6.json")]) == 0


def test_pliable_and_edges(files, capsys):
    tmp, ex1, _ = files
    assert main(["pliable", "--instance", str(ex1)]) == 0
    assert "t=9 rate=2.0000 certified=true choice=1:2,2:1,3:1" in capsys.readouterr().out
    assert main(["pliable", "--instance", str(ex1), "--choice", "1:3,2:3,3:1"]) == 0
    assert main(["pliable", "--instance", str(ex1), "--choice", "1:1,2:3,3:1"]) == 4
    capsys.readouterr()
    assert main(["enumerate-edges", "--instance", str(ex1)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == 225 and doc["max_size"] == 4
    assert [[0, 0, 0], [0, 0, 1], [1, 1, 2], [2, 1, 2]] in doc["edges"]


def test_threads_env(files, capsys, monkeypatch):
    tmp, ex1, _ = files
    monkeypatch.setenv("VP_THREADS", "2")
    assert main(["solve", "--instance", str(ex1), "--out", str(tmp / "a.json")]) == 0
    monkeypatch.setenv("VP_THREADS", "x")
    assert main(["solve", "--instance", str(ex1), "--out", str(tmp / "b.json")]) == 4
