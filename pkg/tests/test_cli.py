import json

from qdlab.features import load_graph
from qdlab.lab.cli import main
from qdlab.problems import load_coverage

CONFIG = """config_id = "cli"
master_seed = 3
grid = [15, 31, 63, 127]
replications = 30
timing = false

[problem]
name = "onemax"

[stop]
covered_all = true
"""


def test_run_prints_json(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG)
    assert main(["run", str(cfg), "--n", "31", "--rep", "2"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["n"] == 31 and rec["stream"] == 32 and rec["t_cover"] > 0


def test_sweep_then_fit(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG)
    out = tmp_path / "o.csv"
    assert main(["sweep", str(cfg), "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 4 * 30
    capsys.readouterr()
    assert main(["fit", str(out), "cover_k1"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["verdict"] and fit["ns"] == [15, 31, 63, 127]
    # same data, stricter threshold: verdict fails, exit code follows
    assert main(["fit", str(out), "cover_k1", "--max-spread", "1.0001"]) == 1


def test_verify_exit_codes(capsys):
    assert main(["verify", "--only", "P1"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_gen_roundtrip(tmp_path):
    assert main(["gen", "graph", "-o", str(tmp_path), "--count", "2", "--n", "7"]) == 0
    g = load_graph(tmp_path / "graph_001.txt")
    assert g.n_nodes == 7 and g.m == 14
    assert main(["gen", "coverage", "-o", str(tmp_path), "--n", "9", "--r", "2"]) == 0
    inst = load_coverage(tmp_path / "coverage_000.txt")
    assert inst.n == 9 and inst.r == 2


def test_config_error_exit(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG.replace('grid = [15, 31, 63, 127]', 'grid = [15]\nspace = "k=3"'))
    assert main(["sweep", str(cfg), "-o", str(tmp_path / "x.csv")]) == 2
    assert "k=3" in capsys.readouterr().err
