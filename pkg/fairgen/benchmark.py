"""Wall-time scaling of the sampling and generator-training pipeline."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from fairgen.generator.sequence import build_generator, train_generator
from fairgen.metrics.baselines import er_generate
from fairgen.model import GenTrainConfig, LabelSet, SamplerConfig, WalkBatch
from fairgen.sampler.walks import embedding_walks, sample_context
from fairgen.util.rng import derive_rng, derive_seed

log = logging.getLogger(__name__)


@dataclass(slots=True)
class BenchmarkRow:
    sweep: str  # nodes | density
    n: int
    m: int
    density: float
    seconds: float


@dataclass(slots=True)
class BenchmarkResult:
    rows: list[BenchmarkRow] = field(default_factory=list)
    slope_nodes: float | None = None
    slope_edges: float | None = None


def fit_slope(sizes: Sequence[float], seconds: Sequence[float]) -> float:
    """Least-squares slope of ``log seconds`` against ``log size``."""
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.maximum(np.asarray(seconds, dtype=np.float64), 1e-9))
    if len(x) < 2 or np.ptp(x) == 0:
        raise ValueError("slope fit needs at least two distinct sizes")
    return float(np.polyfit(x, y, 1)[0])


def edges_for_density(n: int, density: float) -> int:
    return int(round(density * n * (n - 1) / 2))


def time_pipeline(
    n: int,
    density: float,
    *,
    seed: int,
    num_walks: int = 200,
    walk_length: int = 10,
    walks_per_node: int = 10,
    dim: int = 16,
    heads: int = 2,
    threads: int = 1,
) -> BenchmarkRow:
    """Time the embedding corpus, context sampling and one generator epoch on an ER graph.

    The graph itself is built outside the timed region; isolated nodes are
    skipped by the samplers.
    """
    g = er_generate(n, edges_for_density(n, density), derive_rng(seed, "bench-graph", n))
    cfg = SamplerConfig(
        walk_length=walk_length, mix_ratio=1.0, num_walks=num_walks, seed=derive_seed(seed, "bench")
    )
    empty = LabelSet(entries={}, num_classes=1)

    start = time.perf_counter()
    embedding_walks(g, cfg, walks_per_node, seed=derive_seed(seed, "bench-embed"), threads=threads)
    pos = sample_context(g, empty, cfg, threads=threads)
    model = build_generator(
        n, seed=derive_seed(seed, "bench-gen"), dim=dim, heads=heads, max_len=walk_length
    )
    train_generator(
        model,
        pos,
        WalkBatch(walks=[], role="negative"),
        GenTrainConfig(mu=0.0, epochs=1, seed=derive_seed(seed, "bench-train")),
    )
    seconds = time.perf_counter() - start
    return BenchmarkRow(sweep="", n=n, m=g.m, density=density, seconds=seconds)


def benchmark(
    sizes: Sequence[int],
    densities: Sequence[float],
    *,
    seed: int = 0,
    base_density: float = 0.005,
    density_nodes: int = 5000,
    threads: int = 1,
    on_progress: Callable[[str, int, int], None] | None = None,
) -> BenchmarkResult:
    """Node-count sweep at *base_density* and density sweep at *density_nodes*."""
    result = BenchmarkResult()
    jobs = [("nodes", n, base_density) for n in sizes]
    jobs += [("density", density_nodes, d) for d in densities]
    if jobs:
        # untimed first call; torch initialises lazily
        _, n0, d0 = min(jobs, key=lambda job: job[1])
        time_pipeline(n0, d0, seed=seed, threads=threads)
    for i, (sweep, n, density) in enumerate(jobs, start=1):
        if on_progress:
            on_progress(sweep, i, len(jobs))
        row = time_pipeline(n, density, seed=seed, threads=threads)
        row.sweep = sweep
        log.info("%s sweep: n=%d m=%d %.3fs", sweep, row.n, row.m, row.seconds)
        result.rows.append(row)

    node_rows = [r for r in result.rows if r.sweep == "nodes"]
    if len({r.n for r in node_rows}) >= 2:
        result.slope_nodes = fit_slope([r.n for r in node_rows], [r.seconds for r in node_rows])
    edge_rows = [r for r in result.rows if r.sweep == "density"]
    if len({r.m for r in edge_rows}) >= 2:
        result.slope_edges = fit_slope([r.m for r in edge_rows], [r.seconds for r in edge_rows])
    return result


def parse_range(text: str) -> list[int]:
    """``"500..5000"`` expands to ten evenly spaced sizes; commas list sizes explicitly."""
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        if lo < 2 or hi < lo:
            raise ValueError(f"invalid size range {text!r}")
        return sorted({int(round(x)) for x in np.linspace(lo, hi, 10)})
    return [int(x) for x in text.split(",") if x.strip()]


def parse_float_range(text: str) -> list[float]:
    if ".." in text:
        lo, hi = (float(x) for x in text.split("..", 1))
        if lo <= 0 or hi < lo:
            raise ValueError(f"invalid density range {text!r}")
        return [float(x) for x in np.linspace(lo, hi, 10)]
    return [float(x) for x in text.split(",") if x.strip()]
