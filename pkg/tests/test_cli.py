"""Tests for CLI commands via subprocess."""

import json
import os
import subprocess
from collections.abc import Callable
from pathlib import Path

import pytest

from fairgen.sampler.walks import read_walks
from tests.builders import build_bridge_graph, write_graph_files

pytestmark = pytest.mark.integration

Runner = Callable[..., subprocess.CompletedProcess[str]]

# Small enough for a subprocess run in a few seconds
SMALL_RUN = [
    "--set", "T=4",
    "--set", "K=40",
    "--set", "dim=8",
    "--set", "heads=2",
    "--set", "ff_dim=16",
    "--set", "epochs=1",
    "--set", "gen_batch_size=16",
    "--set", "walks_per_node=2",
    "--set", "window=2",
    "--set", "hidden=8",
    "--set", "N1=8",
    "--set", "T1=2",
    "--set", "cycles=2",
    "--set", "generation_factor=5",
]  # fmt: skip


def _header(path: Path) -> dict[str, int]:
    first = path.read_text().splitlines()[0].lstrip("# ")
    return {k: int(v) for k, v in (part.split("=") for part in first.split())}


def _train(cli_runner: Runner, files: dict[str, Path], out: Path, *extra: str):
    return cli_runner(
        "train",
        "--graph", str(files["graph"]),
        "--labels", str(files["labels"]),
        "--protected", str(files["protected"]),
        "--out", str(out),
        "--seed", "5",
        "--threads", "1",
        *SMALL_RUN,
        *extra,
    )  # fmt: skip


class TestHelp:
    def test_lists_commands(self, cli_runner: Runner) -> None:
        """`fairgen --help` names every subcommand."""
        result = cli_runner("--help")
        assert result.returncode == 0, f"stderr: {result.stderr}"
        for name in ("sample", "pretrain", "train", "generate", "assemble", "evaluate", "baseline"):
            assert name in result.stdout

    def test_unknown_flag_rejected(self, cli_runner: Runner) -> None:
        """An unknown option should exit with the usage error code."""
        result = cli_runner("evaluate", "--bogus")
        assert result.returncode == 2
        assert "No such option" in result.stderr


class TestInputErrors:
    def test_missing_input_file(self, tmp_path: Path, cli_runner: Runner) -> None:
        """A missing input file should give a non-zero exit."""
        missing = tmp_path / "nope.edges"
        result = cli_runner(
            "evaluate", "--graph", str(missing), "--generated", str(missing),
            "--protected", str(missing),
        )  # fmt: skip
        assert result.returncode != 0

    def test_malformed_edge_list(self, tmp_path: Path, cli_runner: Runner) -> None:
        """A bad line is reported with its file position and exit code 1."""
        bad = tmp_path / "bad.edges"
        bad.write_text("0 1\n1 2 3\n")
        prot = tmp_path / "prot.txt"
        prot.write_text("0\n")
        result = cli_runner(
            "evaluate", "--graph", str(bad), "--generated", str(bad), "--protected", str(prot)
        )
        assert result.returncode == 1
        assert "Error:" in result.stderr
        assert ":2:" in result.stderr

    def test_bad_config_key(self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner) -> None:
        """An unknown --set key should fail before any output is written."""
        out = tmp_path / "run"
        result = cli_runner(
            "sample", "--graph", str(sbm_files["graph"]), "--labels", str(sbm_files["labels"]),
            "--out", str(out), "--set", "walkz=3",
        )  # fmt: skip
        assert result.returncode == 1
        assert "unknown config key" in result.stderr
        assert not out.exists()


class TestEvaluate:
    def test_identity_is_zero(self, tmp_path: Path, cli_runner: Runner) -> None:
        """Evaluating a graph against itself should give zero discrepancy."""
        files = write_graph_files(tmp_path, build_bridge_graph(4), protected=[0, 4])
        result = cli_runner(
            "evaluate", "--graph", str(files["graph"]), "--generated", str(files["graph"]),
            "--protected", str(files["protected"]), "--format", "json",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        data = json.loads(result.stdout)
        for row in data["metrics"]:
            assert row["R"] in (0.0, None), row
            assert row["R_protected"] in (0.0, None), row

    def test_writes_reports(self, tmp_path: Path, cli_runner: Runner) -> None:
        """evaluate --out should write csv, json and text reports plus a manifest."""
        files = write_graph_files(tmp_path, build_bridge_graph(4), protected=[0])
        out = tmp_path / "eval"
        result = cli_runner(
            "evaluate", "--graph", str(files["graph"]), "--generated", str(files["graph"]),
            "--protected", str(files["protected"]), "--out", str(out),
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        assert "Graph Comparison" in result.stdout
        for name in ("metrics.csv", "metrics.json", "metrics.txt"):
            assert (out / "reports" / name).is_file()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "evaluate"
        assert "manifest.json" in manifest["outputs"]


class TestBaseline:
    def test_er_exact_counts(self, tmp_path: Path, cli_runner: Runner) -> None:
        """baseline --model er should write exactly the requested edge count."""
        out = tmp_path / "er"
        result = cli_runner(
            "baseline", "--model", "er", "--nodes", "1005", "--edges", "25571",
            "--seed", "1", "--out", str(out),
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        assert _header(out / "graphs" / "baseline.edges") == {"nodes": 1005, "edges": 25571}

    def test_seed_from_environment(self, tmp_path: Path, cli_runner: Runner) -> None:
        """FAIRGEN_SEED should stand in for --seed."""
        args = ("baseline", "--model", "ba", "--nodes", "60", "--attach", "2")
        flag = cli_runner(*args, "--seed", "5", "--out", str(tmp_path / "a"))
        env = {**os.environ, "FAIRGEN_SEED": "5"}
        from_env = cli_runner(*args, "--out", str(tmp_path / "b"), env=env)
        assert flag.returncode == 0 and from_env.returncode == 0, from_env.stderr
        a = (tmp_path / "a" / "graphs" / "baseline.edges").read_bytes()
        b = (tmp_path / "b" / "graphs" / "baseline.edges").read_bytes()
        assert a == b
        assert json.loads((tmp_path / "b" / "manifest.json").read_text())["seed"] == 5

    def test_er_needs_edges(self, tmp_path: Path, cli_runner: Runner) -> None:
        """An ER baseline without --edges should be rejected."""
        result = cli_runner("baseline", "--model", "er", "--nodes", "10", "--out", str(tmp_path / "x"))
        assert result.returncode == 1
        assert "--edges is required" in result.stderr


class TestLemmaCheck:
    def test_report_and_json(self, tmp_path: Path, cli_runner: Runner) -> None:
        """lemma-check should print the report and write its JSON."""
        files = write_graph_files(tmp_path, build_bridge_graph(4), protected=[0, 1, 2, 3])
        out = tmp_path / "lemma"
        result = cli_runner(
            "lemma-check", "--graph", str(files["graph"]), "--subset", str(files["protected"]),
            "--delta", "0.5", "--t-max", "6", "--out", str(out),
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        assert "Escape Bound Check" in result.stdout
        data = json.loads((out / "reports" / "lemma.json").read_text())
        assert data["schema_version"] == "fairgen.lemma.v1"
        assert data["t_max"] == 6
        assert data["phi"] == pytest.approx(1 / 13)


class TestSample:
    def test_positive_walks(self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner) -> None:
        """sample should write K walks of length T and snapshot the config."""
        out = tmp_path / "sample"
        result = cli_runner(
            "sample", "--graph", str(sbm_files["graph"]), "--labels", str(sbm_files["labels"]),
            "--out", str(out), "--seed", "2", "--set", "K=25", "--set", "T=6",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        batch = read_walks(out / "walks" / "positive.txt")
        assert len(batch) == 25
        assert batch.length == 6
        snapshot = (out / "config.snapshot").read_text().splitlines()
        assert "seed=2" in snapshot
        assert "num_walks=25" in snapshot


class TestTrain:
    def test_layout(self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner) -> None:
        """train should write the full run layout and a manifest without timings."""
        out = tmp_path / "run"
        result = _train(cli_runner, sbm_files, out)
        assert result.returncode == 0, f"stderr: {result.stderr}"
        for rel in (
            "model/generator.ckpt",
            "model/discriminator.ckpt",
            "model/embeddings.txt",
            "walks/positive.txt",
            "walks/negative.txt",
            "walks/generated.txt",
            "scores/scores.txt",
            "graphs/generated.edges",
            "reports/objective.csv",
            "reports/pseudo_labels.tsv",
            "reports/training.txt",
            "reports/timings.json",
            "config.snapshot",
            "manifest.json",
        ):
            assert (out / rel).is_file(), rel
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert "timings" not in manifest
        assert "reports/timings.json" in manifest["outputs"]
        objective = (out / "reports" / "objective.csv").read_text().splitlines()
        assert objective[0] == "cycle,lambda,J_G,J_P,J_F,J_L,J_S,J"
        assert len(objective) == 3
        assert not list(tmp_path.glob(".run-*"))

    def test_same_seed_same_outputs(
        self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner
    ) -> None:
        """Two runs with the same seed should write identical bytes."""
        a, b = tmp_path / "a", tmp_path / "b"
        assert _train(cli_runner, sbm_files, a).returncode == 0
        assert _train(cli_runner, sbm_files, b).returncode == 0
        for rel in ("model/generator.ckpt", "walks/positive.txt", "graphs/generated.edges"):
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

    def test_failure_leaves_no_output(self, tmp_path: Path, cli_runner: Runner) -> None:
        """Training needs a label for every class; the run fails after staging began."""
        files = write_graph_files(tmp_path, build_bridge_graph(4), protected=[0])
        files["labels"] = tmp_path / "labels.tsv"
        files["labels"].write_text("0\t0\n7\t2\n")
        out = tmp_path / "run"
        result = _train(cli_runner, files, out, "--set", "cycles=1")
        assert result.returncode == 1
        assert "class" in result.stderr
        assert not out.exists()
        assert not list(tmp_path.glob(".run-*"))


class TestStagedPipeline:
    def test_generate_assemble_evaluate(
        self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner
    ) -> None:
        """generate, assemble and evaluate should chain from a --no-assemble run."""
        run_dir = tmp_path / "run"
        result = _train(cli_runner, sbm_files, run_dir, "--no-assemble")
        assert result.returncode == 0, f"stderr: {result.stderr}"
        assert not (run_dir / "graphs").exists()

        gen_dir = tmp_path / "gen"
        result = cli_runner(
            "generate", "--run", str(run_dir), "--graph", str(sbm_files["graph"]),
            "--out", str(gen_dir), "--threads", "1",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"

        asm_dir = tmp_path / "asm"
        result = cli_runner(
            "assemble", "--scores", str(gen_dir / "scores" / "scores.txt"),
            "--graph", str(sbm_files["graph"]), "--protected", str(sbm_files["protected"]),
            "--out", str(asm_dir), "--allow-uncovered",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        generated = asm_dir / "graphs" / "generated.edges"
        assembly = json.loads((asm_dir / "reports" / "assembly.json").read_text())
        codes = {w["code"] for w in assembly["warnings"]}
        original_edges = sum(
            1 for line in sbm_files["graph"].read_text().splitlines() if line.strip()
        )
        if "insufficient-support" not in codes:
            assert _header(generated)["edges"] == original_edges

        result = cli_runner(
            "evaluate", "--graph", str(sbm_files["graph"]), "--generated", str(generated),
            "--protected", str(sbm_files["protected"]), "--format", "csv",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        assert result.stdout.splitlines()[0] == "name,original,generated,R,R_protected,flags"

    def test_scores_and_augment(
        self, sbm_files: dict[str, Path], tmp_path: Path, cli_runner: Runner
    ) -> None:
        """Scores from positive walks should augment the graph by at most the fraction."""
        sample_dir = tmp_path / "sample"
        result = cli_runner(
            "sample", "--graph", str(sbm_files["graph"]), "--labels", str(sbm_files["labels"]),
            "--out", str(sample_dir), "--set", "K=200",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"

        score_dir = tmp_path / "scores"
        result = cli_runner(
            "scores", "--walks", str(sample_dir / "walks" / "positive.txt"),
            "--graph", str(sbm_files["graph"]), "--out", str(score_dir),
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"

        aug_dir = tmp_path / "aug"
        result = cli_runner(
            "augment", "--scores", str(score_dir / "scores" / "scores.txt"),
            "--graph", str(sbm_files["graph"]), "--out", str(aug_dir), "--fraction", "0.05",
        )  # fmt: skip
        assert result.returncode == 0, f"stderr: {result.stderr}"
        header = _header(aug_dir / "graphs" / "augmented.edges")
        original_edges = sum(
            1 for line in sbm_files["graph"].read_text().splitlines() if line.strip()
        )
        assert original_edges <= header["edges"] <= original_edges + -(-original_edges // 20)
