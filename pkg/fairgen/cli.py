"""fairgen CLI: fairness-aware graph generation from walks."""

from __future__ import annotations

import json
import logging
import os
import shutil
import tempfile
import time
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from fairgen.assemble import (
    accumulate_scores,
    assemble,
    augment,
    generate_scores,
    read_scores,
    write_scores,
)
from fairgen.benchmark import benchmark as run_benchmark
from fairgen.benchmark import parse_float_range, parse_range
from fairgen.export import build_manifest, export_json, metric_csv, text_report, write_manifest
from fairgen.export.csv_out import dict_rows_csv, rows_to_csv, write_text
from fairgen.export.json_out import dump_json, lemma_to_dict
from fairgen.export.text_report import lemma_text, training_text
from fairgen.fair.self_paced import write_audit
from fairgen.generator.checkpoint import load_checkpoint, save_checkpoint
from fairgen.generator.sequence import GeneratorModel
from fairgen.generator.skipgram import write_embeddings
from fairgen.graph.io import load_edge_list, load_labels, load_protected, write_edge_list
from fairgen.metrics.baselines import ba_generate, er_generate
from fairgen.metrics.discrepancy import metric_report
from fairgen.model import Warning
from fairgen.sampler.diffusion import verify_lemma_bound
from fairgen.sampler.walks import read_walks, sample_context, write_walks
from fairgen.train.config import (
    TrainRunConfig,
    parse_pairs,
    parse_set_args,
    snapshot_pairs,
    snapshot_text,
)
from fairgen.train.trainer import objective_report, pretrain, run
from fairgen.util.rng import derive_rng, derive_seed

app = typer.Typer(name="fairgen", help="Fairness-aware graph generation toolkit")
console = Console(stderr=True)
log = logging.getLogger("fairgen")

SEED_ENV = "FAIRGEN_SEED"


class BaselineModel(str, Enum):
    """Reference random-graph models."""

    er = "er"
    ba = "ba"


class ReportFormat(str, Enum):
    text = "text"
    json = "json"
    csv = "csv"


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
) -> None:
    """Fairness-aware graph generation toolkit."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False, show_time=False)],
        force=True,
    )
    logging.getLogger("fairgen").setLevel(logging.DEBUG if verbose else logging.INFO)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _fail(e: Exception) -> None:
    console.print(f"[red]Error:[/red] {escape(str(e))}")
    raise typer.Exit(1)


def resolve_seed(flag: int | None, pairs: dict[str, str]) -> int:
    """``--seed``, then the config ``seed`` key, then ``FAIRGEN_SEED``, then 0."""
    if flag is not None:
        return flag
    if "seed" in pairs:
        return int(pairs["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _load_run_config(
    config: Path | None, set_args: list[str] | None, seed: int | None
) -> TrainRunConfig:
    pairs: dict[str, str] = {}
    if config is not None:
        pairs.update(parse_pairs(config.read_text(encoding="utf-8"), str(config)))
    pairs.update(parse_set_args(set_args))
    pairs["seed"] = str(resolve_seed(seed, pairs))
    return TrainRunConfig().with_overrides(pairs)


def _default_threads() -> int:
    return os.cpu_count() or 1


@contextmanager
def staged_output(out: Path) -> Iterator[Path]:
    """Yield a staging directory whose contents move into *out* on success.

    On any exception the staging directory is removed and *out* is left as
    it was.
    """
    out = out.resolve()
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out.name}-", dir=out.parent))
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    out.mkdir(parents=True, exist_ok=True)
    for item in sorted(staging.iterdir()):
        target = out / item.name
        if target.is_dir():
            shutil.rmtree(target)
        os.replace(item, target)
    staging.rmdir()


def _written(staging: Path) -> list[str]:
    return sorted(str(p.relative_to(staging)) for p in staging.rglob("*") if p.is_file())


def _finish(
    staging: Path,
    command: str,
    seed: int,
    config: dict[str, str],
    inputs: list[Path],
    timings: dict[str, float] | None = None,
) -> None:
    """Write timings and the manifest as the last artifacts of a run."""
    if timings is not None:
        dump_json({k: round(v, 6) for k, v in timings.items()}, staging / "reports" / "timings.json")
    outputs = _written(staging) + ["manifest.json"]
    manifest = build_manifest(command, seed, config, inputs, outputs)
    write_manifest(manifest, staging / "manifest.json")


def _print_warnings(warnings: list[Warning]) -> None:
    for w in warnings:
        console.print(f"[yellow]Warning:[/yellow] {escape(f'[{w.code}] {w.message}')}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@app.command()
def sample(
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    labels: Path = typer.Option(..., "--labels", exists=True, dir_okay=False, help="Label file"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    config: Path = typer.Option(None, "--config", exists=True, dir_okay=False),
    set_args: list[str] = typer.Option(None, "--set", help="Override a config key (key=value)"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
    threads: int = typer.Option(None, "--threads", help="Worker threads for walk sampling"),
):
    """Sample one label-informed positive walk batch."""
    try:
        cfg = _load_run_config(config, set_args, seed)
        g = load_edge_list(graph)
        lab = load_labels(labels, g)
        with staged_output(out) as staging:
            with console.status("[bold]Sampling walks…"):
                batch = sample_context(
                    g, lab, cfg.sampler(0), stream=("context", 0), threads=threads or _default_threads()
                )
            write_walks(batch, staging / "walks" / "positive.txt")
            (staging / "config.snapshot").write_text(snapshot_text(cfg), encoding="utf-8")
            _finish(staging, "sample", cfg.seed, snapshot_pairs(cfg), [graph, labels])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'walks' / 'positive.txt'}")


@app.command(name="pretrain")
def pretrain_cmd(
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    config: Path = typer.Option(None, "--config", exists=True, dir_okay=False),
    set_args: list[str] = typer.Option(None, "--set", help="Override a config key (key=value)"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
    threads: int = typer.Option(None, "--threads", help="Worker threads for walk sampling"),
):
    """Pretrain skip-gram node embeddings."""
    try:
        cfg = _load_run_config(config, set_args, seed)
        g = load_edge_list(graph)
        with staged_output(out) as staging:
            with console.status("[bold]Training skip-gram embeddings…"):
                table = pretrain(g, cfg, threads=threads or _default_threads())
            write_embeddings(table, g, staging / "model" / "embeddings.txt")
            (staging / "config.snapshot").write_text(snapshot_text(cfg), encoding="utf-8")
            _finish(staging, "pretrain", cfg.seed, snapshot_pairs(cfg), [graph])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'model' / 'embeddings.txt'}")


@app.command()
def train(
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    labels: Path = typer.Option(..., "--labels", exists=True, dir_okay=False, help="Label file"),
    protected: Path = typer.Option(
        ..., "--protected", exists=True, dir_okay=False, help="Protected-group file"
    ),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    config: Path = typer.Option(None, "--config", exists=True, dir_okay=False),
    set_args: list[str] = typer.Option(None, "--set", help="Override a config key (key=value)"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
    threads: int = typer.Option(None, "--threads", help="Worker threads for walk sampling"),
    do_assemble: bool = typer.Option(
        True, "--assemble/--no-assemble", help="Also generate scores and assemble a graph"
    ),
):
    """Run the self-paced training loop and write models, pools and reports."""
    try:
        cfg = _load_run_config(config, set_args, seed)
        g = load_edge_list(graph)
        lab = load_labels(labels, g)
        groups = load_protected(protected, g)
        workers = threads or _default_threads()
        timings: dict[str, float] = {}
        with staged_output(out) as staging:
            start = time.perf_counter()
            with console.status("[bold]Training skip-gram embeddings…"):
                table = pretrain(g, cfg, threads=workers)
            timings["pretrain"] = time.perf_counter() - start

            start = time.perf_counter()
            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                BarColumn(),
                TaskProgressColumn(),
                console=console,
            ) as progress:
                task_id = progress.add_task("Training…", total=cfg.cycles)

                def _on_progress(stage: str, current: int, total: int) -> None:
                    progress.update(
                        task_id, completed=current - 1, description=f"Cycle {current}/{total}…"
                    )

                artifacts = run(
                    g, lab, groups, cfg, embeddings=table, threads=workers, on_progress=_on_progress
                )
                progress.update(task_id, completed=cfg.cycles, description="Done")
            timings["train"] = time.perf_counter() - start

            save_checkpoint(artifacts.generator, staging / "model" / "generator.ckpt")
            save_checkpoint(artifacts.discriminator, staging / "model" / "discriminator.ckpt")
            write_embeddings(artifacts.embeddings, g, staging / "model" / "embeddings.txt")
            write_walks(artifacts.positive, staging / "walks" / "positive.txt")
            write_walks(artifacts.negative, staging / "walks" / "negative.txt")
            write_text(dict_rows_csv(objective_report(artifacts)), staging / "reports" / "objective.csv")
            write_audit(artifacts.audit, g, staging / "reports" / "pseudo_labels.tsv")
            write_text(training_text(artifacts.cycles), staging / "reports" / "training.txt")

            if do_assemble:
                start = time.perf_counter()
                with console.status("[bold]Generating walks and assembling graph…"):
                    walks, scores = generate_scores(
                        artifacts.generator,
                        g.m,
                        artifacts.start_distribution,
                        walk_length=cfg.walk_length,
                        factor=cfg.generation_factor,
                        seed=derive_seed(cfg.seed, "generate"),
                        threads=workers,
                    )
                    result = assemble(scores, g, groups, cfg.assembly_tol, allow_uncovered=True)
                timings["assemble"] = time.perf_counter() - start
                write_walks(walks, staging / "walks" / "generated.txt")
                write_scores(scores, staging / "scores" / "scores.txt")
                write_edge_list(result.graph, staging / "graphs" / "generated.edges")
                _print_warnings(result.warnings)

            (staging / "config.snapshot").write_text(snapshot_text(cfg), encoding="utf-8")
            _finish(
                staging, "train", cfg.seed, snapshot_pairs(cfg), [graph, labels, protected], timings
            )
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out}")


@app.command()
def generate(
    run_dir: Path = typer.Option(
        ..., "--run", exists=True, file_okay=False, help="Output directory of a train run"
    ),
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    factor: float = typer.Option(None, "--factor", help="Transitions per original edge"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
    threads: int = typer.Option(None, "--threads", help="Worker threads for score accumulation"),
):
    """Generate walks from a trained model and accumulate the score matrix."""
    snapshot = run_dir / "config.snapshot"
    try:
        cfg = _load_run_config(snapshot if snapshot.is_file() else None, None, seed)
        g = load_edge_list(graph)
        model = load_checkpoint(run_dir / "model" / "generator.ckpt")
        if not isinstance(model, GeneratorModel):
            raise ValueError("model/generator.ckpt does not hold a generator")
        if model.n != g.n:
            raise ValueError(f"generator covers {model.n} nodes, graph has {g.n}")
        pool = read_walks(run_dir / "walks" / "positive.txt")
        starts = pool.start_frequencies(g.n).astype(float)
        with staged_output(out) as staging:
            with console.status("[bold]Generating walks…"):
                walks, scores = generate_scores(
                    model,
                    g.m,
                    starts,
                    walk_length=cfg.walk_length,
                    factor=factor or cfg.generation_factor,
                    seed=derive_seed(cfg.seed, "generate"),
                    threads=threads or _default_threads(),
                )
            write_walks(walks, staging / "walks" / "generated.txt")
            write_scores(scores, staging / "scores" / "scores.txt")
            _finish(
                staging,
                "generate",
                cfg.seed,
                snapshot_pairs(cfg),
                [graph, run_dir / "model" / "generator.ckpt", run_dir / "walks" / "positive.txt"],
            )
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'scores' / 'scores.txt'}")


@app.command(name="assemble")
def assemble_cmd(
    scores: Path = typer.Option(..., "--scores", exists=True, dir_okay=False, help="Score file"),
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Original graph"),
    protected: Path = typer.Option(
        ..., "--protected", exists=True, dir_okay=False, help="Protected-group file"
    ),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    tol: float = typer.Option(0.1, "--tol", help="Protected-volume tolerance"),
    allow_uncovered: bool = typer.Option(
        False, "--allow-uncovered", help="Warn instead of failing on nodes without scores"
    ),
):
    """Threshold a score matrix into a graph with the original edge count."""
    try:
        g = load_edge_list(graph)
        groups = load_protected(protected, g)
        B = read_scores(scores)
        result = assemble(B, g, groups, tol, allow_uncovered=allow_uncovered)
        with staged_output(out) as staging:
            write_edge_list(result.graph, staging / "graphs" / "generated.edges")
            dump_json(
                {
                    "phases": result.phase_counts,
                    "warnings": [
                        {"code": w.code, "message": w.message, "context": w.context}
                        for w in result.warnings
                    ],
                },
                staging / "reports" / "assembly.json",
            )
            _finish(staging, "assemble", 0, {"tol": repr(tol)}, [scores, graph, protected])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    _print_warnings(result.warnings)
    console.print(f"[green]Wrote:[/green] {out / 'graphs' / 'generated.edges'}")


@app.command(name="augment")
def augment_cmd(
    scores: Path = typer.Option(..., "--scores", exists=True, dir_okay=False, help="Score file"),
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Original graph"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    fraction: float = typer.Option(0.05, "--fraction", help="New edges as a fraction of m"),
):
    """Add the best-scored novel pairs to the original graph."""
    try:
        g = load_edge_list(graph)
        result = augment(read_scores(scores), g, fraction)
        with staged_output(out) as staging:
            write_edge_list(result.graph, staging / "graphs" / "augmented.edges")
            _finish(staging, "augment", 0, {"fraction": repr(fraction)}, [scores, graph])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    _print_warnings(result.warnings)
    console.print(f"[green]Wrote:[/green] {out / 'graphs' / 'augmented.edges'}")


@app.command()
def evaluate(
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Original graph"),
    generated: Path = typer.Option(
        ..., "--generated", exists=True, dir_okay=False, help="Generated graph"
    ),
    protected: Path = typer.Option(
        ..., "--protected", exists=True, dir_okay=False, help="Protected-group file"
    ),
    out: Path = typer.Option(None, "--out", help="Also write CSV/JSON/text reports here"),
    fmt: ReportFormat = typer.Option(ReportFormat.text, "--format", help="Stdout format"),
):
    """Compare graph statistics overall and on the protected ego networks."""
    try:
        g = load_edge_list(graph)
        g_gen = load_edge_list(generated, universe=g)
        groups = load_protected(protected, g)
        with console.status("[bold]Computing statistics…"):
            report = metric_report(g, g_gen, groups)
        if out is not None:
            with staged_output(out) as staging:
                write_text(metric_csv(report), staging / "reports" / "metrics.csv")
                export_json(report, staging / "reports" / "metrics.json")
                write_text(text_report(report), staging / "reports" / "metrics.txt")
                _finish(staging, "evaluate", 0, {}, [graph, generated, protected])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)

    if fmt is ReportFormat.json:
        typer.echo(export_json(report), nl=False)
    elif fmt is ReportFormat.csv:
        typer.echo(metric_csv(report), nl=False)
    else:
        typer.echo(text_report(report))


@app.command()
def baseline(
    model: BaselineModel = typer.Option(..., "--model", help="Random-graph model"),
    nodes: int = typer.Option(..., "--nodes", help="Number of nodes"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    edges: int = typer.Option(None, "--edges", help="Edge count (er)"),
    attach: int = typer.Option(None, "--attach", help="Edges per new node (ba)"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
):
    """Generate an Erdos-Renyi or Barabasi-Albert reference graph."""
    try:
        resolved = resolve_seed(seed, {})
        rng = derive_rng(resolved, "baseline", model.value)
        if model is BaselineModel.er:
            if edges is None:
                raise ValueError("--edges is required for the er model")
            g = er_generate(nodes, edges, rng)
            params = {"model": "er", "nodes": str(nodes), "edges": str(edges)}
        else:
            if attach is None:
                raise ValueError("--attach is required for the ba model")
            g = ba_generate(nodes, attach, rng)
            params = {"model": "ba", "nodes": str(nodes), "attach": str(attach)}
        with staged_output(out) as staging:
            write_edge_list(g, staging / "graphs" / "baseline.edges")
            _finish(staging, "baseline", resolved, params, [])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'graphs' / 'baseline.edges'} ({g.n} nodes, {g.m} edges)")


@app.command(name="lemma-check")
def lemma_check(
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    subset: Path = typer.Option(
        ..., "--subset", exists=True, dir_okay=False, help="Node-set file (one node per line)"
    ),
    delta: float = typer.Option(0.5, "--delta", help="Core threshold in (0, 1)"),
    t_max: int = typer.Option(10, "--t-max", help="Largest walk length checked"),
    out: Path = typer.Option(None, "--out", help="Also write a JSON report here"),
    allow_isolated: bool = typer.Option(False, "--allow-isolated"),
):
    """Check the escape-probability bound on the diffusion core of a node set."""
    try:
        g = load_edge_list(graph, allow_isolated=allow_isolated)
        members = sorted(load_protected(subset, g).protected)
        report = verify_lemma_bound(g, members, delta, t_max)
        if out is not None:
            with staged_output(out) as staging:
                dump_json(lemma_to_dict(report), staging / "reports" / "lemma.json")
                params = {"delta": repr(delta), "t_max": str(t_max)}
                _finish(staging, "lemma-check", 0, params, [graph, subset])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    typer.echo(lemma_text(report))


@app.command(name="benchmark")
def benchmark_cmd(
    nodes: str = typer.Option("500..5000", "--nodes", help="Sizes: 'lo..hi' or a comma list"),
    density: float = typer.Option(0.005, "--density", help="Density for the node sweep"),
    densities: str = typer.Option(None, "--densities", help="Density sweep: 'lo..hi' or list"),
    density_nodes: int = typer.Option(5000, "--density-nodes", help="Nodes for the density sweep"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
    seed: int = typer.Option(None, "--seed", help="Master seed"),
    threads: int = typer.Option(1, "--threads", help="Worker threads for walk sampling"),
):
    """Time the sampling and training pipeline across graph sizes."""
    try:
        resolved = resolve_seed(seed, {})
        sizes = parse_range(nodes)
        dens = parse_float_range(densities) if densities else []
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
        ) as progress:
            task_id = progress.add_task("Benchmarking…", total=len(sizes) + len(dens))

            def _on_progress(sweep: str, current: int, total: int) -> None:
                progress.update(task_id, completed=current - 1, description=f"{sweep} {current}/{total}…")

            result = run_benchmark(
                sizes,
                dens,
                seed=resolved,
                base_density=density,
                density_nodes=density_nodes,
                threads=threads,
                on_progress=_on_progress,
            )
            progress.update(task_id, completed=len(sizes) + len(dens), description="Done")
        with staged_output(out) as staging:
            write_text(
                rows_to_csv(
                    ("sweep", "n", "m", "density", "seconds"),
                    ((r.sweep, r.n, r.m, r.density, r.seconds) for r in result.rows),
                ),
                staging / "reports" / "benchmark.csv",
            )
            dump_json(
                {"slope_nodes": result.slope_nodes, "slope_edges": result.slope_edges},
                staging / "reports" / "benchmark_fit.json",
            )
            params = {"nodes": nodes, "density": repr(density), "densities": densities or ""}
            _finish(staging, "benchmark", resolved, params, [])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'reports' / 'benchmark.csv'}")
    if result.slope_nodes is not None:
        typer.echo(json.dumps({"slope_nodes": result.slope_nodes, "slope_edges": result.slope_edges}))


@app.command(name="scores")
def scores_cmd(
    walks: Path = typer.Option(..., "--walks", exists=True, dir_okay=False, help="Walk file"),
    graph: Path = typer.Option(..., "--graph", exists=True, dir_okay=False, help="Edge-list file"),
    out: Path = typer.Option(..., "--out", help="Output directory"),
):
    """Accumulate a score matrix from an existing walk file."""
    try:
        g = load_edge_list(graph)
        B = accumulate_scores(read_walks(walks), g.n)
        with staged_output(out) as staging:
            write_scores(B, staging / "scores" / "scores.txt")
            _finish(staging, "scores", 0, {}, [walks, graph])
    except (ValueError, RuntimeError, OSError) as e:
        _fail(e)
    console.print(f"[green]Wrote:[/green] {out / 'scores' / 'scores.txt'}")


if __name__ == "__main__":
    app()
