"""Second-order biased walks and the label-informed context sampler."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from fairgen.graph.core import IsolatedNodeError
from fairgen.model import Graph, LabelSet, SamplerConfig, Walk, WalkBatch, WalkOrigin
from fairgen.util.rng import derive_rng

log = logging.getLogger(__name__)

# Skip-gram negative-sampling exponent for the unigram distribution
UNIGRAM_POWER = 0.75


def _step_weights(g: Graph, prev: int, nbrs: np.ndarray, cfg: SamplerConfig) -> np.ndarray:
    """Unnormalised transition weights 1/p (return), 1 (distance 1), 1/q (distance 2)."""
    weights = np.full(len(nbrs), 1.0 / cfg.q)
    weights[np.isin(nbrs, g.neighbors(prev), assume_unique=True)] = 1.0
    weights[nbrs == prev] = 1.0 / cfg.p
    return weights


def biased_walk(
    g: Graph,
    start: int,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    *,
    origin: WalkOrigin = WalkOrigin.uniform,
    label_class: int | None = None,
) -> Walk:
    """Sample one ``cfg.walk_length``-node second-order walk from *start*.

    The first step is uniform over neighbors; later steps use the
    return/in-out bias of ``cfg.p`` and ``cfg.q``.
    """
    if g.degree(start) == 0:
        raise IsolatedNodeError(start, g.node_ids[start])
    unbiased = cfg.p == 1.0 and cfg.q == 1.0
    walk = [int(start)]
    nbrs = g.neighbors(start)
    walk.append(int(nbrs[rng.integers(len(nbrs))]))
    while len(walk) < cfg.walk_length:
        prev, cur = walk[-2], walk[-1]
        nbrs = g.neighbors(cur)
        if unbiased:
            walk.append(int(nbrs[rng.integers(len(nbrs))]))
            continue
        cum = np.cumsum(_step_weights(g, prev, nbrs, cfg))
        idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        walk.append(int(nbrs[min(idx, len(nbrs) - 1)]))
    return Walk(nodes=tuple(walk), origin=origin, label_class=label_class)


def sample_context(
    g: Graph,
    labels: LabelSet,
    cfg: SamplerConfig,
    *,
    stream: tuple[int | str, ...] = ("context",),
    threads: int = 1,
) -> WalkBatch:
    """Label-informed context sampler.

    Each of the ``cfg.num_walks`` walks independently starts, with probability
    ``cfg.mix_ratio``, at a uniformly random node, and otherwise at a labelled
    node (uniform over labelled nodes, or class-balanced when
    ``cfg.class_balanced``). Walk *i* draws from the stream
    ``(cfg.seed, *stream, i)`` so the batch is independent of *threads*.
    """
    if cfg.mix_ratio < 1.0 and len(labels) == 0:
        raise ValueError("label-informed sampling needs at least one labelled node when r < 1")
    walkable = np.flatnonzero(g.degrees() > 0)
    if walkable.size == 0:
        raise ValueError("graph has no edges to walk on")
    label_nodes = labels.nodes()
    classes = [(c, members) for c, members in labels.by_class().items() if members]

    def _one(i: int) -> Walk:
        rng = derive_rng(cfg.seed, *stream, i)
        if rng.random() < cfg.mix_ratio:
            start = int(walkable[rng.integers(len(walkable))])
            return biased_walk(g, start, cfg, rng, origin=WalkOrigin.uniform)
        if cfg.class_balanced:
            cls, members = classes[rng.integers(len(classes))]
            start = members[rng.integers(len(members))]
        else:
            start = label_nodes[rng.integers(len(label_nodes))]
            cls = labels.entries[start]
        return biased_walk(g, start, cfg, rng, origin=WalkOrigin.label, label_class=cls)

    walks = _fan_out(_one, cfg.num_walks, threads)
    return WalkBatch(walks=walks, role="positive")


def _fan_out(fn, count: int, threads: int) -> list:
    if threads <= 1 or count < 2:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def embedding_walks(
    g: Graph,
    cfg: SamplerConfig,
    walks_per_node: int,
    *,
    seed: int,
    threads: int = 1,
) -> WalkBatch:
    """Corpus of ``walks_per_node`` biased walks from every non-isolated node."""
    starts = np.flatnonzero(g.degrees() > 0)
    if len(starts) < g.n:
        log.warning("%d isolated node(s) get no embedding walks", g.n - len(starts))
    jobs = [(r, int(u)) for r in range(walks_per_node) for u in starts]

    def _one(i: int) -> Walk:
        r, u = jobs[i]
        return biased_walk(g, u, cfg, derive_rng(seed, "embedding", r, u))

    return WalkBatch(walks=_fan_out(_one, len(jobs), threads), role="positive")


def unigram_distribution(frequencies: np.ndarray) -> np.ndarray:
    """Node distribution proportional to ``frequency ** 0.75``."""
    weights = np.asarray(frequencies, dtype=np.float64) ** UNIGRAM_POWER
    total = weights.sum()
    if total <= 0:
        raise ValueError("unigram distribution needs at least one positive frequency")
    return weights / total


def noise_walks(
    frequencies: np.ndarray, count: int, length: int, rng: np.random.Generator
) -> WalkBatch:
    """Length-*length* sequences of i.i.d. nodes from the unigram^(3/4) distribution."""
    probs = unigram_distribution(frequencies)
    nodes = rng.choice(len(probs), size=(count, length), p=probs)
    walks = [Walk(nodes=tuple(int(x) for x in row), origin=WalkOrigin.noise) for row in nodes]
    return WalkBatch(walks=walks, role="negative")


def shuffled_walks(batch: WalkBatch, rng: np.random.Generator) -> WalkBatch:
    """Negative pool made of real walks with their node order permuted."""
    walks = []
    for w in batch.walks:
        nodes = list(w.nodes)
        rng.shuffle(nodes)
        walks.append(Walk(nodes=tuple(nodes), origin=WalkOrigin.noise))
    return WalkBatch(walks=walks, role="negative")


# ---------------------------------------------------------------------------
# Text format: "origin<TAB>n0 n1 ... n(T-1)"
# ---------------------------------------------------------------------------


def _parse_tag(tag: str) -> tuple[WalkOrigin, int | None]:
    name, _, cls = tag.partition(":")
    origin = WalkOrigin(name)
    return origin, (int(cls) if cls else None)


def write_walks(batch: WalkBatch, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# role={batch.role}"]
    lines.extend(f"{w.tag}\t{' '.join(str(x) for x in w.nodes)}" for w in batch.walks)
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def read_walks(path: str | Path) -> WalkBatch:
    p = Path(path)
    role = "positive"
    walks: list[Walk] = []
    for line_no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# role="):
                role = line.split("=", 1)[1].strip()
            continue
        tag, sep, body = line.partition("\t")
        if not sep:
            raise ValueError(f"{p}:{line_no}: expected 'origin<TAB>nodes'")
        try:
            origin, cls = _parse_tag(tag)
            nodes = tuple(int(x) for x in body.split())
        except ValueError as e:
            raise ValueError(f"{p}:{line_no}: {e}") from None
        walks.append(Walk(nodes=nodes, origin=origin, label_class=cls))
    return WalkBatch(walks=walks, role=role)
