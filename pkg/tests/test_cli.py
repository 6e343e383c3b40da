import json

import pytest

from cbpnet.cli import ExperimentConfig, main


def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out-dir", str(out)])
    return code, out


def test_malthusian(tmp_path, capsys):
    code, out = run(tmp_path, "a", "malthusian", "--kernel", "linear", "--offset", "0.5")
    assert code == 0
    d = json.loads((out / "malthusian.json").read_text())
    assert d["lambda"] == pytest.approx(2.5, abs=1e-8)
    assert len(d["config_hash"]) == 16
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["lambda"] == pytest.approx(2.5, abs=1e-8)


@pytest.mark.parametrize("cmd,args", [
    ("generate", ["--n", "60", "--dot"]),
    ("couple", ["--n", "150", "--replicas", "6", "--m", "2"]),
    ("limit-sample", ["--samples", "300"]),
    ("pmf", ["--x-max", "10", "--outdeg-uniform", "1", "2"]),
    ("compare", ["--n", "300", "--samples", "300"]),
    ("diagnose", ["--n", "300", "--samples", "200"]),
])
def test_outputs_are_byte_identical(tmp_path, cmd, args):
    c1, a = run(tmp_path, "a", cmd, *args, "--seed", "4")
    c2, b = run(tmp_path, "b", cmd, *args, "--seed", "4")
    assert c1 == c2 == 0
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_generate_writes_graph(tmp_path):
    code, out = run(tmp_path, "g", "generate", "--n", "30", "--outdeg-point", "2", "--dot")
    assert code == 0
    g = json.loads((out / "graph.json").read_text())
    assert g["n"] == 30 and sum(e["mult"] for e in g["edges"]) == 60
    assert (out / "graph.dot").read_text().startswith("digraph")


def test_csv_header_carries_hash(tmp_path):
    code, out = run(tmp_path, "p", "pmf", "--x-max", "5")
    first = (out / "pmf.csv").read_text().splitlines()[0]
    assert code == 0 and first.startswith("# config_hash=")


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kernel": {"family": "constant", "offset": 2.0}, "n": 10}))
    code, out = run(tmp_path, "c", "malthusian", "--config", str(cfg), "--offset", "3.0")
    d = json.loads((out / "malthusian.json").read_text())
    assert code == 0 and d["lambda"] == pytest.approx(3.0)


def test_config_hash_ignores_workers_and_out_dir():
    a = ExperimentConfig(workers=1, out_dir="x")
    b = ExperimentConfig(workers=4, out_dir="y")
    assert a.config_hash == b.config_hash
    assert a.config_hash != ExperimentConfig(seed=1).config_hash


@pytest.mark.parametrize("args", [
    ["malthusian", "--damping", "1.5"],
    ["malthusian", "--n", "0"],
    ["malthusian", "--kernel", "linear", "--slope", "-1"],
    ["generate", "--outdeg-pmf=-0.5,1"],
])
def test_bad_config_exit_two(args, capsys):
    assert main(args) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["malthusian", "--config", str(cfg)]) == 2


def test_runtime_error_exit_one(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["pmf", "--out-dir", str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err
