import csv
import io
import json
import subprocess
import sys

import pytest

from mpnn_lab import cli
from mpnn_lab.capacity import gin_capacity

SUBCOMMANDS = [
    ["enumerate"], ["universe", "build"], ["universe", "stats"], ["capacity"], ["bounds"], ["bound-sweep"],
    ["protocol", "analyze"], ["simulate"], ["reproduce-table"], ["capacity-grid"],
]


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "g8.jsonl"
    assert cli.main(["universe", "build", "--family", "graphs", "--n", "8", "--size", "60",
                     "--seed", "3", "--out", str(path)]) == 0
    return path


@pytest.mark.parametrize("words", SUBCOMMANDS)
def test_help(words, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(words + ["--help"])
    assert exc.value.code == 0
    assert "usage: mpnn-lab" in capsys.readouterr().out


def test_top_level_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    for words in SUBCOMMANDS:
        assert words[0] in out


def test_enumerate(capsys, tmp_path):
    code, out, _ = run(capsys, "enumerate", "--family", "trees", "--v", 9, "--out", tmp_path / "t.txt")
    assert code == 0 and out == "family,v,count\ntrees,9,47\n"
    assert len((tmp_path / "t.txt").read_text().splitlines()) == 47


def test_universe_build_deterministic(tmp_path, dataset):
    other = tmp_path / "again.jsonl"
    cli.main(["universe", "build", "--family", "graphs", "--n", "8", "--size", "60", "--seed", "3", "--out", str(other)])
    assert other.read_bytes() == dataset.read_bytes()
    splits = [json.loads(line)["split"] for line in dataset.read_text().splitlines()]
    assert len(splits) == 60 and set(splits) <= {"train", "valid", "test"}


def test_universe_stats(capsys, tmp_path):
    path = tmp_path / "t8.jsonl"
    cli.main(["universe", "build", "--family", "trees", "--n", "8", "--size", "30", "--out", str(path)])
    code, out, _ = run(capsys, "universe", "stats", "--in", path, "--family", "trees")
    (row,) = rows(out)
    assert code == 0 and row["classes"] == "3" and float(row["avg_degree"]) == 3.5


def test_capacity(capsys, tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("4;0-1,1-2,2-3;\n")
    code, out, _ = run(capsys, "capacity", "--graph", path, "--part-a", "0,1", "--schedule", "d=3,w=2")
    assert code == 0
    assert rows(out) == [{"exact": "6", "upper_bound": "12", "cut": "2"}]
    code, out, _ = run(capsys, "capacity", "--graph", path, "--part-a", "0,1", "--schedule", "d=3,w=2",
                       "--direction", "undirected")
    assert rows(out)[0]["upper_bound"] == "6"


def test_bounds_and_sweep(capsys):
    code, out, _ = run(capsys, "bounds", "--family", "graphs", "--n", 12, "--readout", "consensus")
    assert code == 0 and out.splitlines()[1].startswith("graphs,12,2,consensus,9.822")
    code, out, _ = run(capsys, "bound-sweep", "--family", "trees", "--n-min", 8, "--n-max", 20)
    parsed = rows(out)
    assert len(parsed) == 7 * 2
    assert {(r["n"], r["readout"]) for r in parsed} == {(str(n), m) for n in range(8, 21, 2)
                                                        for m in ("majority", "consensus")}


def test_odd_n_rejected(capsys):
    code, _, err = run(capsys, "bounds", "--family", "graphs", "--n", 7, "--readout", "majority")
    assert code == 1 and err.startswith("mpnn-lab: error:")
    code, _, err = run(capsys, "bound-sweep", "--family", "graphs", "--n-min", 5, "--n-max", 9)
    assert code == 1 and "error" in err


def test_protocol_analyze(capsys, tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("# equality on two elements\n1 0\n0, 1\n")
    code, out, _ = run(capsys, "protocol", "analyze", "--table", path)
    assert code == 0
    assert json.loads(out) == {"class_count_bound": 1.0, "distinct_values": 2, "min_monochromatic_partition": 4,
                               "partition_bound": 2.0, "shape": [2, 2]}
    path.write_text("1 0\n0\n")
    assert run(capsys, "protocol", "analyze", "--table", path)[0] == 1


def test_simulate(capsys, dataset):
    args = ["simulate", "--dataset", dataset, "--schedule", "d=2,w=0,m=2", "--seed", 1]
    code, out, _ = run(capsys, *args)
    (row,) = rows(out)
    assert code == 0 and row["capacity"] == "0" and float(row["collision_rate"]) == 1.0
    code, out, _ = run(capsys, "simulate", "--dataset", dataset, "--schedule", "d=8,w=64,m=64")
    assert float(rows(out)[0]["collision_rate"]) == 0.0


def test_capacity_grid(capsys, dataset):
    code, out, _ = run(capsys, "capacity-grid", "--dataset", dataset)
    parsed = rows(out)
    assert code == 0 and len(parsed) == 35
    for r in parsed:
        assert int(r["capacity"]) == gin_capacity(int(r["d"]), int(r["w"]))
    code, out, _ = run(capsys, "capacity-grid", "--dataset", dataset, "--depths", "2,3", "--widths", "1,8",
                       "--simulate", "--limit", 30)
    parsed = rows(out)
    assert len(parsed) == 4 and all(0.0 <= float(r["collision_rate"]) <= 1.0 for r in parsed)


def test_reproduce_table(capsys):
    code, out, _ = run(capsys, "reproduce-table", "--samples", 40)
    parsed = {(r["family"], int(r["n"])): r for r in rows(out)}
    assert code == 0 and len(parsed) == 12
    assert [parsed["graphs", n]["classes"] for n in (6, 8, 10, 12)] == ["3", "21", "231", "6328"]
    assert [parsed["trees", n]["classes"] for n in range(8, 21, 2)] == ["3", "6", "21", "66", "276", "1128", "5671"]
    assert parsed["trees", 22]["classes"] == "27730" and "22730" in parsed["trees", 22]["note"]
    assert all(r["note"] == "" for key, r in parsed.items() if key != ("trees", 22))


@pytest.mark.parametrize("argv", [
    ["universe", "build", "--family", "trees", "--n", "10", "--size", "20", "--seed", "9"],
    ["reproduce-table", "--samples", "20", "--seed", "4"],
    ["bound-sweep", "--family", "graphs", "--n-min", "4", "--n-max", "12", "--p", "0.3"],
])
def test_byte_identical_runs(argv, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}"
        assert cli.main(argv + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep defaults\nfamily = trees\nn_min = 8\nn-max = 12\nreadouts = consensus\n")
    code, out, _ = run(capsys, "bound-sweep", "--config", cfg)
    assert code == 0 and [r["n"] for r in rows(out)] == ["8", "10", "12"]
    code, out, _ = run(capsys, "bound-sweep", "--config", cfg, "--n-max", 8)
    assert [r["n"] for r in rows(out)] == ["8"]


def test_config_bool_and_errors(capsys, tmp_path, dataset):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(f"dataset = {dataset}\nschedule = d=1,w=3\nanonymous = true\n")
    assert run(capsys, "simulate", "--config", cfg)[0] == 0
    cfg.write_text("anonymous = maybe\n")
    code, _, err = run(capsys, "simulate", "--config", cfg)
    assert code == 1 and "true/false" in err
    cfg.write_text("no separator here\n")
    assert run(capsys, "simulate", "--config", cfg)[0] == 1
    assert run(capsys, "simulate", "--config", tmp_path / "missing.cfg")[0] == 1


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["enumerate", "--family", "cycles", "--v", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_validation_errors_exit_1(capsys, tmp_path):
    assert run(capsys, "enumerate", "--family", "graphs", "--v", 9)[0] == 1
    assert run(capsys, "simulate", "--dataset", tmp_path / "nope.jsonl", "--schedule", "w=1")[0] == 1
    code, _, err = run(capsys, "capacity", "--graph", tmp_path / "nope.txt", "--part-a", "0", "--schedule", "w=1")
    assert code == 1 and err.startswith("mpnn-lab: error:")


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_thread_variable_validated(value, monkeypatch, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, value)
    code, _, err = run(capsys, "reproduce-table", "--samples", 5)
    assert code == 1 and cli.THREADS_ENV in err


def test_thread_variable_caps_workers(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    assert cli.worker_count() == 1
    monkeypatch.delenv(cli.THREADS_ENV)
    assert cli.worker_count() >= 1


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mpnn_lab.cli", "enumerate", "--family", "graphs", "--v", "5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "family,v,count\ngraphs,5,21\n"
