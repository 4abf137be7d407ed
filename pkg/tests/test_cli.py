import json
import subprocess
import sys

import pytest

from intralink.cli import dispatch
from intralink.constructions import construct
from intralink.network import serialize
from intralink.suite import generic_four_lines

SMALL_SUITE = """
soundness_cases = 10
lemma_cases = 20
rewrite_cases = 10
region_cases = 10
lift_cases = 10
k2_vs_2_k = 3
k2_vs_3_k = 10
k2_vs_k_k = [1, 2]
"""


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "intralink.cli", *args],
                          capture_output=True, text=True, env=env)


@pytest.fixture
def xi_net(tmp_path):
    path = tmp_path / "xi.json"
    path.write_bytes(serialize(construct("intra_sawtooth", widths=[4]).net))
    return path


def test_construct_subprocess(tmp_path):
    out = tmp_path / "net.json"
    proc = run_cli("construct", "--kind", "resnet_sawtooth", "--k", "3", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "pieces=8" in proc.stdout and "audit=pass" in proc.stdout
    assert json.loads(out.read_text())["arch"] == "resnet_scalar"


def test_construct_json_report(capsys):
    assert dispatch(["construct", "--kind", "twoproduct", "--w1", "3", "--w2", "2", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pieces"] == 12 and report["audit"] == "pass"


@pytest.mark.parametrize("argv", [
    ["construct", "--kind", "twoproduct", "--w1", "3"],
    ["construct", "--kind", "intra_sawtooth", "--widths", "3"],
    ["construct", "--kind", "nonsense"],
    ["bound", "--widths", "5", "--mode", "intra2"],
    ["bound", "--widths", "a,b"],
    ["separation", "--theorem", "k2_vs_k", "--k", "3"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(argv):
    assert dispatch(argv) == 2


@pytest.mark.parametrize("argv, expected", [
    (["bound", "--widths", "6,4", "--mode", "intra2"], "70"),
    (["bound", "--widths", "3,2"], "12"),
    (["bound", "--widths", "4", "--input-dim", "2"], "11"),
    (["bound", "--widths", "4", "--mode", "intra2", "--input-dim", "2"], "29"),
    (["bound", "--widths", "3,3", "--mode", "dense"], "50"),
])
def test_bound(capsys, argv, expected):
    assert dispatch(argv) == 0
    assert capsys.readouterr().out.strip() == expected


def test_eval_and_analyze(capsys, xi_net):
    assert dispatch(["eval", "--net", str(xi_net), "--x", "0", "--x", "1/2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "0\t0"
    assert dispatch(["analyze", "--net", str(xi_net)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pieces"] == 6 and rep["upper_bound"] == 7


def test_bad_net_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"layers": []}')
    assert dispatch(["analyze", "--net", str(bad)]) == 2
    assert dispatch(["analyze", "--net", str(tmp_path / "missing.json")]) == 2


def test_export_roundtrip(tmp_path, xi_net):
    csv1 = tmp_path / "a.csv"
    csv2 = tmp_path / "b.csv"
    assert dispatch(["export", "--net", str(xi_net), "--out", str(csv1)]) == 0
    assert dispatch(["export", "--pwl", str(csv1), "--out", str(csv2)]) == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    assert csv1.read_text().splitlines()[0] == "x_num,x_den,y_num,y_den"
    assert dispatch(["export"]) == 2


def test_export_json(capsys, xi_net):
    assert dispatch(["export", "--net", str(xi_net), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["domain"] == ["0", "1"] and len(doc["breakpoints"]) == 5


def test_regions(tmp_path, capsys):
    net = tmp_path / "lines.json"
    net.write_bytes(serialize(generic_four_lines()))
    svg = tmp_path / "cells.svg"
    cells = tmp_path / "cells.json"
    argv = ["regions", "--net", str(net), "--box=-2,2,-2,2", "--svg", str(svg),
            "--json", str(cells)]
    assert dispatch(argv) == 0
    assert "merged_regions=11" in capsys.readouterr().out
    assert svg.read_text().startswith("<svg")
    assert json.loads(cells.read_text())["merged_region_count"] == 11
    assert dispatch(["regions", "--net", str(net), "--box", "1,0,0,1"]) == 2


def test_fuzz_json_and_seed_env(tmp_path):
    out = tmp_path / "fuzz.json"
    env = dict(__import__("os").environ, INTRALINK_SEED="5")
    proc = run_cli("fuzz", "--check", "lemmas", "--cases", "30", "--json", str(out), env=env)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert doc[0]["seed"] == 5 and doc[0]["ok"]
    env["INTRALINK_SEED"] = "five"
    assert run_cli("fuzz", "--cases", "1", env=env).returncode == 2


@pytest.mark.parametrize("check", ["soundness", "rewrite", "regions", "lift"])
def test_fuzz_checks(check):
    assert dispatch(["fuzz", "--check", check, "--cases", "8", "--max-width", "4",
                     "--max-depth", "2"]) == 0


def test_separation_json(tmp_path):
    out = tmp_path / "sep.json"
    assert dispatch(["separation", "--theorem", "k2_vs_3", "--k", "10", "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert (doc["deep_pieces"], doc["shallow_feedforward_bound"]) == (100, 81)


def test_suite_small_config_deterministic(tmp_path):
    cfg = tmp_path / "suite.toml"
    cfg.write_text(SMALL_SUITE)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    p1 = run_cli("suite", "--config", str(cfg), "--out", str(a))
    p2 = run_cli("suite", "--config", str(cfg), "--out", str(b))
    assert p1.returncode == 0, p1.stderr
    assert a.read_bytes() == b.read_bytes()
    assert p1.stderr.count("PASS") == 7


@pytest.mark.parametrize("text", ["bogus = 1", "seed = 'x'", "k2_vs_k_k = 3", "= broken"])
def test_suite_bad_config(tmp_path, text):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    assert dispatch(["suite", "--config", str(cfg)]) == 2
