import json
import math
from fractions import Fraction

import numpy as np
import pytest

import balex
from balex.cli import main


def run_cli(*args):
    return main([str(a) for a in args])


BUILD_ARGS = (
    "build-random", "--n", 4, "--d", 3, "--m", 4, "--epsilon", "1/2",
    "--delta-min", 2, "--t", 3, "--seed", 7, "--max-attempts", 1000,
)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "g.bgex"
    code = run_cli(*BUILD_ARGS, "--out", out)
    assert code == 0
    return out


# --- exit codes ---------------------------------------------------------------


def test_usage_errors_exit_one(tmp_path):
    assert run_cli("no-such-command") == 1
    assert run_cli("build-random", "--bogus-flag", 1) == 1
    assert run_cli("build-random", "--n", 4) == 1  # missing parameters
    assert run_cli("verify", "--graph", tmp_path / "missing.bgex", "--epsilon", "1/2") == 1


def test_parameter_failures_exit_two(tmp_path):
    code = run_cli(
        "build-random", "--n", 4, "--d", 3, "--m", 4, "--epsilon", "1/2",
        "--delta-min", 2, "--t", 3, "--seed", 7, "--max-attempts", 0,
        "--out", tmp_path / "never.bgex",
    )
    assert code == 2
    assert not (tmp_path / "never.bgex").exists()
    code = run_cli(
        "build-linear", "--n", 64, "--epsilon", "1/4", "--seed", 1,
        "--out", tmp_path / "lin.bgex",
    )
    assert code == 2  # default kappa=1, c=1: m = 64 - 864 < 1


def test_failed_search_writes_diagnostic_report(tmp_path):
    out = tmp_path / "never.bgex"
    code = run_cli(
        "build-random", "--n", 3, "--d", 2, "--m", 3, "--epsilon", "0",
        "--delta-min", 1, "--t", 3, "--seed", 5, "--max-attempts", 2,
        "--out", out,
    )
    assert code == 2
    report = json.loads((tmp_path / "never.bgex.report.json").read_text())
    assert report["found"] is False
    assert len(report["attempts"]) == 2
    for attempt in report["attempts"]:
        assert set(attempt["worst_by_k"]) == {"1", "2", "3"}


def test_capacity_exit_three(built, tmp_path):
    code = run_cli(
        "verify", "--graph", built, "--epsilon", "1/2", "--budget", 10,
        "--out", tmp_path / "r.json",
    )
    assert code == 3


def test_capacity_with_sampled_fallback_passes(built, tmp_path):
    code = run_cli(
        "verify", "--graph", built, "--epsilon", "1/2", "--budget", 10,
        "--sampled-trials", 20, "--seed", 3, "--out", tmp_path / "r.json",
    )
    assert code == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    kinds = {rep["k"]: rep["kind"] for rep in doc["reports"]}
    assert kinds[1] == kinds[2] == kinds[3] == "extractor-sampled"
    assert kinds[4] == "extractor-exact"  # C(16,16) = 1 fits any budget


# --- build-random -------------------------------------------------------------


def test_build_random_graph_reverifies_on_reload(built):
    graph = balex.load_graph(built)
    assert balex.verify_min_degree(graph, 3, 2).passed
    for k in range(1, 5):
        assert balex.verify_extractor_exact(graph, k, Fraction(1, 2)).passed
    with open(str(built) + ".report.json") as fh:
        report = json.load(fh)
    assert report["found"] is True
    assert report["graph_digest"] == balex.graph_digest(graph)


def test_build_random_deterministic_reruns(tmp_path):
    out_a = tmp_path / "a.bgex"
    out_b = tmp_path / "b.bgex"
    assert run_cli(*BUILD_ARGS, "--out", out_a) == 0
    assert run_cli(*BUILD_ARGS, "--out", out_b) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    with open(str(out_a) + ".report.json") as fh:
        report_a = json.load(fh)
    with open(str(out_b) + ".report.json") as fh:
        report_b = json.load(fh)
    report_a["config"].pop("out_path")
    report_b["config"].pop("out_path")
    assert report_a == report_b


def test_build_random_config_file(tmp_path):
    config = {
        "n": 4, "d": 3, "m": 4, "epsilon": "1/2", "delta_min": 2, "t": 3,
        "seed": 7, "max_attempts": 1000, "out_path": str(tmp_path / "c.bgex"),
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    assert run_cli("build-random", "--config", cfg_path) == 0
    # a flag override changes the seed and hence the graph
    assert run_cli(
        "build-random", "--config", cfg_path, "--seed", 8,
        "--out", tmp_path / "d.bgex",
    ) == 0
    assert (tmp_path / "c.bgex").read_bytes() != (tmp_path / "d.bgex").read_bytes()


# --- build-linear --------------------------------------------------------------


def test_build_linear_prints_derived_dimensions(tmp_path, capsys):
    out = tmp_path / "lin.bgex"
    code = run_cli(
        "build-linear", "--n", 64, "--epsilon", "1/4", "--kappa", 0.015625,
        "--s", 16, "--seed", 9, "--out", out,
    )
    assert code == 0
    printed = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert printed["d"] == math.ceil(0.015625 * math.log2(64) ** 3 * math.log2(4) ** 2)
    assert printed["m"] == 64 - printed["d"]
    assert printed["delta_guarantee"] is True
    graph = balex.load_graph(out)
    assert graph.backend_kind == "linear"
    assert (graph.d, graph.m) == (printed["d"], printed["m"])


def test_build_linear_descriptor_reload_same_outputs(tmp_path):
    out = tmp_path / "lin.bgex"
    assert run_cli(
        "build-linear", "--n", 32, "--epsilon", "1/4", "--kappa", 0.02,
        "--s", 8, "--seed", 11, "--out", out,
    ) == 0
    g1 = balex.load_graph(out)
    g2 = balex.load_graph(out)
    rng = np.random.Generator(np.random.Philox(key=2))
    for _ in range(1000):
        x = int(rng.integers(0, 1 << 32, dtype=np.uint64))
        y = int(rng.integers(0, g1.degree))
        assert g1.ext_eval(x, y) == g2.ext_eval(x, y)


# --- verify ----------------------------------------------------------------------


def test_verify_linear_graph_with_sampled_fallback(tmp_path):
    lin = tmp_path / "lin.bgex"
    # n=12, eps=1/4, kappa=0.02: d = ceil(0.02 * log2(12)^3 * 4) = 4, m = 8
    assert run_cli(
        "build-linear", "--n", 12, "--epsilon", "1/4", "--kappa", 0.02,
        "--s", 8, "--seed", 42, "--out", lin,
    ) == 0
    out = tmp_path / "report.json"
    code = run_cli(
        "verify", "--graph", lin, "--epsilon", "1/2", "--k-min", 6, "--k-max", 6,
        "--sampled-trials", 3, "--seed", 1, "--budget", 1000,
        "--delta-min", 16, "--t", 10, "--out", out,
    )
    doc = json.loads(out.read_text())
    assert doc["reports"][0]["kind"] == "extractor-sampled"
    assert doc["degree_report"] == {
        "kind": "delta-guarantee", "pass": True, "t": 10, "Delta": 16,
    }
    assert code == (0 if doc["pass"] else 2)


def test_verify_pass_and_fail_exit_codes(built, tmp_path):
    assert run_cli(
        "verify", "--graph", built, "--epsilon", "1/2",
        "--delta-min", 2, "--t", 3, "--out", tmp_path / "ok.json",
    ) == 0
    assert run_cli(
        "verify", "--graph", built, "--epsilon", "0",
        "--out", tmp_path / "fail.json",
    ) == 2
    doc = json.loads((tmp_path / "fail.json").read_text())
    assert doc["pass"] is False


# --- congestion ---------------------------------------------------------------------


def test_congestion_with_bset_file(built, tmp_path):
    b = balex.oracles.explicit_bset(4, 2, {0, 3, 7, 12})
    bset_path = tmp_path / "b.bset"
    balex.save_bset(b, bset_path)
    out = tmp_path / "congestion.json"
    code = run_cli(
        "congestion", "--graph", built, "--bset", bset_path,
        "--epsilon", "1/2", "--t", 3, "--out", out,
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["b_size"] == 4
    assert doc["report"]["s"] == 2
    assert doc["report"]["pass"] is True


def test_congestion_with_oracle(built, tmp_path):
    # proxy costs at n=4 are 5 (four strings) or 6, so k=5 gives |B| = 4
    out = tmp_path / "congestion.json"
    code = run_cli(
        "congestion", "--graph", built, "--oracle", "compressor", "--k", 5,
        "--epsilon", "1/2", "--t", 3, "--out", out,
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["b_size"] == 4
    assert doc["report"]["s"] == 2


# --- amplify ------------------------------------------------------------------------


def test_amplify_list_and_indexed_element_agree(built, tmp_path, capsys):
    out = tmp_path / "list.txt"
    assert run_cli(
        "amplify", "--graph", built, "--epsilon", "1/2", "--delta-blocks", 2,
        "--t", 3, "--x", "b", "--out", out,
    ) == 0
    header, elements = balex.listamp.load_list(out)
    assert header["x"] == "b"
    assert len(elements) == 16
    capsys.readouterr()
    assert run_cli(
        "amplify", "--graph", built, "--epsilon", "1/2", "--delta-blocks", 2,
        "--t", 3, "--x", "b", "--index", 5,
    ) == 0
    printed = capsys.readouterr().out.strip()
    assert int(printed, 16) == elements[5]


def test_amplify_with_bset_prints_survival(built, tmp_path, capsys):
    b = balex.oracles.explicit_bset(4, 2, {1, 2})
    bset_path = tmp_path / "b.bset"
    balex.save_bset(b, bset_path)
    code = run_cli(
        "amplify", "--graph", built, "--epsilon", "1/2", "--delta-blocks", 2,
        "--t", 3, "--x", "0", "--bset", bset_path,
    )
    assert code == 0
    assert "survival_fraction=" in capsys.readouterr().out


def test_console_script_subprocess_determinism(tmp_path):
    # the installed entry point, in fresh processes, still byte-reproduces
    import subprocess
    import sys

    script = [sys.executable, "-m", "balex.cli"]
    outs = []
    for name in ("first.bgex", "second.bgex"):
        out = tmp_path / name
        proc = subprocess.run(
            script + ["build-random", "--n", "4", "--d", "3", "--m", "4",
                      "--epsilon", "1/2", "--delta-min", "2", "--t", "3",
                      "--seed", "7", "--max-attempts", "100",
                      "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
