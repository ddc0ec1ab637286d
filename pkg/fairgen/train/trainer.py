"""The self-paced training loop coupling sampler, generator and fair learner.

Cycle order is fixed: train the generator on the pools, add label-informed
positives, add generated negatives, grow lambda, refresh the self-paced
selection and pseudo-labels, then take ``t1`` discriminator steps.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import torch

from fairgen.fair.discriminator import (
    Discriminator,
    build_discriminator,
    discriminator_objective,
    train_discriminator_step,
)
from fairgen.fair.self_paced import (
    advance_lambda,
    audit_rows,
    frozen_selection,
    pseudo_labels,
    update_self_paced,
)
from fairgen.generator.sequence import (
    GeneratorModel,
    build_generator,
    generate_walks,
    pool_objective,
    train_generator,
)
from fairgen.generator.skipgram import pretrain_embeddings
from fairgen.model import (
    CycleRecord,
    EmbeddingTable,
    Graph,
    GroupMembership,
    LabelSet,
    PseudoLabel,
    SelfPacedState,
    TrainingAbort,
    WalkBatch,
)
from fairgen.sampler.walks import embedding_walks, noise_walks, sample_context, shuffled_walks
from fairgen.train.config import TrainRunConfig
from fairgen.util.rng import derive_rng, derive_seed

log = logging.getLogger(__name__)

OBJECTIVE_COLUMNS = ("J_G", "J_P", "J_F", "J_L", "J_S", "J")


@dataclass(slots=True)
class RunArtifacts:
    generator: GeneratorModel
    discriminator: Discriminator
    embeddings: EmbeddingTable
    state: SelfPacedState
    labels: LabelSet  # ground truth plus the final pseudo-labels
    positive: WalkBatch
    negative: WalkBatch
    cycles: list[CycleRecord] = field(default_factory=list)
    audit: list[PseudoLabel] = field(default_factory=list)
    history: list[SelfPacedState] = field(default_factory=list)

    @property
    def start_distribution(self) -> np.ndarray:
        """Start-node frequencies of the positive pool."""
        freq = self.positive.start_frequencies(self.generator.n).astype(np.float64)
        return freq / freq.sum()


def _check_inputs(g: Graph, labels: LabelSet, groups: GroupMembership, cfg: TrainRunConfig) -> None:
    labels.check_graph(g)
    if groups.n != g.n:
        raise ValueError(f"group membership covers {groups.n} nodes, graph has {g.n}")
    groups.require_both_nonempty()
    if not labels.covers_all_classes():
        empty = [c for c, members in labels.by_class().items() if not members]
        raise ValueError(f"labels must cover every class; no labelled node for class {empty[0]}")
    if g.isolated_nodes():
        raise ValueError(f"graph has {len(g.isolated_nodes())} isolated node(s); training needs none")


def pretrain(g: Graph, cfg: TrainRunConfig, *, threads: int = 1) -> EmbeddingTable:
    """Skip-gram embeddings over biased walks from every node."""
    walk_cfg = cfg.sampler(0)
    corpus = embedding_walks(
        g, walk_cfg, cfg.walks_per_node, seed=derive_seed(cfg.seed, "embedding"), threads=threads
    )
    return pretrain_embeddings(corpus, g.n, cfg.embedding, seed=derive_seed(cfg.seed, "skipgram"))


def initial_negatives(
    positive: WalkBatch, n: int, cfg: TrainRunConfig
) -> WalkBatch:
    rng = derive_rng(cfg.seed, "negatives", 0)
    if cfg.negative_mode == "shuffled":
        return shuffled_walks(positive, rng)
    return noise_walks(positive.node_frequencies(n), cfg.num_walks, cfg.walk_length, rng)


def _selected_labels(truth: LabelSet, sp: SelfPacedState, cfg: TrainRunConfig) -> LabelSet:
    if cfg.no_self_paced:
        return truth
    return truth.merged(pseudo_labels(sp))


def _objective(
    gen: GeneratorModel,
    disc: Discriminator,
    feats: EmbeddingTable,
    labels: LabelSet,
    groups: GroupMembership,
    sp: SelfPacedState,
    pos: WalkBatch,
    neg: WalkBatch,
    cfg: TrainRunConfig,
) -> dict[str, float]:
    j_g = pool_objective(gen, pos, neg, cfg.mu, cfg.log_floor)
    disc.eval()
    with torch.no_grad():
        parts = discriminator_objective(disc, feats, labels, groups, sp, cfg.weights)
    j_s = -sp.lam * float(sp.selected.sum())
    row = {
        "J_G": j_g,
        "J_P": float(parts["J_P"]),
        "J_F": float(parts["J_F"]),
        "J_L": float(parts["J_L"]),
        "J_S": j_s,
    }
    row["J"] = sum(row.values())
    return row


def run(
    g: Graph,
    labels: LabelSet,
    groups: GroupMembership,
    cfg: TrainRunConfig,
    *,
    embeddings: EmbeddingTable | None = None,
    threads: int = 1,
    on_progress: Callable[[str, int, int], None] | None = None,
) -> RunArtifacts:
    """Run the full training loop and return the trained models and traces."""
    _check_inputs(g, labels, groups, cfg)
    n = g.n
    if embeddings is None:
        embeddings = pretrain(g, cfg, threads=threads)
    if embeddings.vectors.shape != (n, cfg.dim):
        raise ValueError(f"embedding shape {embeddings.vectors.shape} does not match ({n}, {cfg.dim})")

    # Step 1: models and the ground-truth selection
    disc = build_discriminator(
        cfg.dim, labels.num_classes, hidden=cfg.hidden, seed=derive_seed(cfg.seed, "discriminator")
    )
    disc_opt = torch.optim.SGD(disc.parameters(), lr=cfg.disc_lr)
    gen = build_generator(
        n,
        seed=derive_seed(cfg.seed, "generator"),
        dim=cfg.dim,
        heads=cfg.heads,
        max_len=cfg.walk_length,
        ff_dim=cfg.ff_dim,
        embedding=embeddings,
    )
    sp = frozen_selection(SelfPacedState.initial(labels, n, cfg.lambda0, cfg.growth))
    current = labels

    # Step 2: initial pools
    positive = sample_context(g, current, cfg.sampler(0), stream=("context", 0), threads=threads)
    negative = initial_negatives(positive, n, cfg)
    log.info("initial pools: %d positive, %d negative walks", len(positive), len(negative))

    artifacts = RunArtifacts(
        generator=gen,
        discriminator=disc,
        embeddings=embeddings,
        state=sp,
        labels=current,
        positive=positive,
        negative=negative,
    )
    disc_step = 0
    for cycle in range(1, cfg.cycles + 1):
        if on_progress:
            on_progress("cycle", cycle, cfg.cycles)
        record = CycleRecord(cycle=cycle, lam=sp.lam)
        try:
            # Step 4
            record.generator_losses = train_generator(gen, positive, negative, cfg.gen(cycle))

            # Step 5
            fresh = sample_context(
                g, current, cfg.sampler(cycle), stream=("context", cycle), threads=threads
            )
            positive.extend(fresh, cfg.max_pool_size)

            # Step 6
            starts = fresh.start_frequencies(n).astype(np.float64)
            generated = generate_walks(
                gen, cfg.num_walks, cfg.walk_length, starts, derive_rng(cfg.seed, "generate", cycle)
            )
            negative.extend(generated, cfg.max_pool_size)

            # Steps 7-8
            sp = advance_lambda(sp, cycle)
            if cfg.no_self_paced:
                sp = frozen_selection(sp)
            else:
                sp = update_self_paced(disc, embeddings, sp)
                pseudo = pseudo_labels(sp)
                artifacts.audit.extend(audit_rows(sp, pseudo))
                record.pseudo_labelled = len(pseudo)
            current = _selected_labels(labels, sp, cfg)

            # Steps 9-11
            rng = derive_rng(cfg.seed, "discriminator-batch", cycle)
            pool = np.asarray(current.nodes(), dtype=np.int64)
            for _ in range(cfg.t1):
                batch = np.sort(rng.choice(pool, size=min(cfg.n1, len(pool)), replace=False))
                record.discriminator_losses.append(
                    train_discriminator_step(
                        disc,
                        embeddings,
                        current,
                        groups,
                        sp,
                        cfg.weights,
                        batch.tolist(),
                        disc_opt,
                        step=disc_step,
                        minibatch_parity=cfg.minibatch_parity,
                    )
                )
                disc_step += 1
        except TrainingAbort as e:
            raise TrainingAbort(e.stage, e.step, e.components, cycle=cycle) from e

        record.lam = sp.lam
        record.selected = int(sp.selected.sum())
        record.positive_pool = len(positive)
        record.negative_pool = len(negative)
        record.objective = _objective(
            gen, disc, embeddings, current, groups, sp, positive, negative, cfg
        )
        artifacts.cycles.append(record)
        artifacts.history.append(sp)
        log.info(
            "cycle %d/%d: lambda=%.4f selected=%d pseudo=%d J=%.4f",
            cycle,
            cfg.cycles,
            sp.lam,
            record.selected,
            record.pseudo_labelled,
            record.objective["J"],
        )

    artifacts.state = sp
    artifacts.labels = current
    return artifacts


def objective_report(artifacts: RunArtifacts) -> list[dict[str, float]]:
    """One row per cycle with every objective component and their sum."""
    rows = []
    for record in artifacts.cycles:
        row: dict[str, float] = {"cycle": record.cycle, "lambda": record.lam}
        row.update({k: record.objective[k] for k in OBJECTIVE_COLUMNS})
        rows.append(row)
    return rows
