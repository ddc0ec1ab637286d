"""Skip-gram with negative sampling over walk corpora (node embeddings)."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from fairgen.model import EmbeddingConfig, EmbeddingTable, Graph, TrainingAbort, WalkBatch
from fairgen.sampler.walks import unigram_distribution
from fairgen.util.rng import derive_rng, torch_seeded

log = logging.getLogger(__name__)


class SkipGram(nn.Module):
    """Center/context embedding pair scored with log-sigmoid dot products."""

    def __init__(self, vocab_size: int, dim: int) -> None:
        super().__init__()
        self.center = nn.Embedding(vocab_size, dim)
        self.context = nn.Embedding(vocab_size, dim)
        bound = 0.5 / dim
        nn.init.uniform_(self.center.weight, -bound, bound)
        nn.init.zeros_(self.context.weight)

    def forward(
        self, centers: torch.Tensor, contexts: torch.Tensor, negatives: torch.Tensor
    ) -> torch.Tensor:
        v = self.center(centers)  # (B, d)
        u = self.context(contexts)  # (B, d)
        u_neg = self.context(negatives)  # (B, k, d)
        pos = F.logsigmoid((u * v).sum(dim=1))
        neg = F.logsigmoid(-torch.bmm(u_neg, v.unsqueeze(2)).squeeze(2)).sum(dim=1)
        return -(pos + neg).mean()


def context_pairs(walks: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``(center, context)`` pairs within *window* positions, both directions."""
    centers, contexts = [], []
    length = walks.shape[1]
    for offset in range(1, min(window, length - 1) + 1):
        left, right = walks[:, :-offset].ravel(), walks[:, offset:].ravel()
        centers.extend((left, right))
        contexts.extend((right, left))
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def pretrain_embeddings(
    walks: WalkBatch,
    n: int,
    cfg: EmbeddingConfig,
    *,
    seed: int,
) -> EmbeddingTable:
    """Train skip-gram embeddings on *walks*.

    Negatives come from the unigram^(3/4) distribution over walk nodes.
    Nodes that never appear in a walk keep a zero vector.
    """
    if len(walks) == 0:
        raise ValueError("skip-gram pretraining needs at least one walk")
    arr = walks.as_array()
    counts = np.bincount(arr.ravel(), minlength=n)
    if len(counts) > n:
        raise ValueError(f"walks reference node {len(counts) - 1} outside [0, {n})")
    unvisited = np.flatnonzero(counts == 0)
    if unvisited.size:
        log.warning(
            "%d node(s) never visited by any walk; their embeddings stay zero (first: %d)",
            unvisited.size,
            int(unvisited[0]),
        )

    with torch_seeded(seed):
        model = SkipGram(n, cfg.dim)
    with torch.no_grad():
        model.center.weight[torch.as_tensor(unvisited, dtype=torch.long)] = 0.0

    centers, contexts = context_pairs(arr, cfg.window)
    noise = unigram_distribution(counts)
    rng = derive_rng(seed, "skipgram")
    opt = torch.optim.SGD(model.parameters(), lr=cfg.lr)
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(centers))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            neg = rng.choice(n, size=(len(idx), cfg.neg_samples), p=noise)
            loss = model(
                torch.as_tensor(centers[idx]),
                torch.as_tensor(contexts[idx]),
                torch.as_tensor(neg),
            )
            if not torch.isfinite(loss):
                raise TrainingAbort("skipgram", step, {"loss": float(loss)})
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_loss += float(loss) * len(idx)
            step += 1
        log.debug("skip-gram epoch %d: mean loss %.4f", epoch + 1, epoch_loss / max(1, len(order)))

    vectors = model.center.weight.detach().numpy().astype(np.float64)
    return EmbeddingTable(vectors=vectors)


def write_embeddings(table: EmbeddingTable, g: Graph, path: str | Path) -> Path:
    """Write ``node v1 ... vd`` lines using external node ids."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        g.node_ids[i] + " " + " ".join(f"{x:.8g}" for x in row)
        for i, row in enumerate(table.vectors)
    ]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def read_embeddings(path: str | Path, g: Graph) -> EmbeddingTable:
    p = Path(path)
    rows: dict[int, list[float]] = {}
    for line_no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] not in g.id_map:
            raise ValueError(f"{p}:{line_no}: unknown node {tokens[0]!r}")
        rows[g.id_map[tokens[0]]] = [float(x) for x in tokens[1:]]
    if len(rows) != g.n:
        raise ValueError(f"{p}: expected {g.n} embedding rows, got {len(rows)}")
    return EmbeddingTable(vectors=np.asarray([rows[i] for i in range(g.n)], dtype=np.float64))
