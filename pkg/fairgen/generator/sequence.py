"""Autoregressive next-node model g_theta and its contrastive walk objective.

One causal self-attention block with a feed-forward sublayer; the output
projection is tied to the node-embedding table.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from fairgen.model import (
    EmbeddingTable,
    GenTrainConfig,
    TrainingAbort,
    Walk,
    WalkBatch,
    WalkOrigin,
)
from fairgen.util.rng import derive_rng, torch_seeded

log = logging.getLogger(__name__)

# Walks generated per forward batch
_GENERATION_CHUNK = 1024


class GeneratorModel(nn.Module):
    def __init__(
        self,
        n: int,
        dim: int = 100,
        heads: int = 4,
        max_len: int = 10,
        ff_dim: int = 128,
    ) -> None:
        super().__init__()
        if dim % heads:
            raise ValueError(f"embedding dim {dim} must be divisible by heads {heads}")
        if max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {max_len}")
        self.n = n
        self.dim = dim
        self.heads = heads
        self.max_len = max_len
        self.ff_dim = ff_dim
        self.embedding = nn.Embedding(n, dim)
        self.position = nn.Embedding(max_len, dim)
        self.attention = nn.MultiheadAttention(dim, heads, dropout=0.0, batch_first=True)
        self.norm1 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(nn.Linear(dim, ff_dim), nn.ReLU(), nn.Linear(ff_dim, dim))
        self.norm2 = nn.LayerNorm(dim)
        self.output_bias = nn.Parameter(torch.zeros(n))
        nn.init.normal_(self.embedding.weight, std=dim**-0.5)
        nn.init.normal_(self.position.weight, std=dim**-0.5)

    def forward(self, seqs: torch.Tensor) -> torch.Tensor:
        """Logits ``(B, L, n)``; position *t* scores the node following ``seqs[:, :t+1]``."""
        length = seqs.shape[1]
        if length > self.max_len:
            raise ValueError(f"sequence length {length} exceeds model context {self.max_len}")
        positions = torch.arange(length, device=seqs.device)
        x = self.embedding(seqs) + self.position(positions)
        causal = torch.triu(torch.ones(length, length, dtype=torch.bool), diagonal=1)
        attended, _ = self.attention(x, x, x, attn_mask=causal, need_weights=False)
        h = self.norm1(x + attended)
        h = self.norm2(h + self.ff(h))
        return h @ self.embedding.weight.T + self.output_bias

    def zero_output_(self) -> GeneratorModel:
        """Zero the tied output projection and bias so every prediction is uniform."""
        with torch.no_grad():
            self.embedding.weight.zero_()
            self.output_bias.zero_()
        return self


def build_generator(
    n: int,
    *,
    seed: int,
    dim: int = 100,
    heads: int = 4,
    max_len: int = 10,
    ff_dim: int = 128,
    embedding: EmbeddingTable | None = None,
) -> GeneratorModel:
    """Seeded model construction, optionally starting from pretrained node embeddings."""
    with torch_seeded(seed):
        model = GeneratorModel(n, dim=dim, heads=heads, max_len=max_len, ff_dim=ff_dim)
    if embedding is not None:
        if embedding.vectors.shape != (n, dim):
            raise ValueError(
                f"embedding table shape {embedding.vectors.shape} does not match ({n}, {dim})"
            )
        with torch.no_grad():
            model.embedding.weight.copy_(torch.as_tensor(embedding.vectors))
    return model


def walk_log_probs(model: GeneratorModel, walks: torch.Tensor) -> torch.Tensor:
    """``log g(w_t | w_<t)`` for ``t = 2..T``, shape ``(B, T-1)``."""
    logits = model(walks[:, :-1])
    logp = F.log_softmax(logits, dim=-1)
    return logp.gather(-1, walks[:, 1:].unsqueeze(-1)).squeeze(-1)


def contrastive_loss(
    model: GeneratorModel,
    pos: torch.Tensor,
    neg: torch.Tensor | None,
    mu: float,
    log_floor: float,
) -> tuple[torch.Tensor, dict[str, float]]:
    """``-mean_pos sum_t log g + mu * mean_neg sum_t max(log g, floor)``."""
    pos_ll = walk_log_probs(model, pos).sum(dim=1).mean()
    loss = -pos_ll
    parts = {"positive_ll": float(pos_ll)}
    if mu > 0 and neg is not None and len(neg):
        neg_ll = walk_log_probs(model, neg).clamp(min=log_floor).sum(dim=1).mean()
        loss = loss + mu * neg_ll
        parts["negative_ll"] = float(neg_ll)
    return loss, parts


def train_generator(
    model: GeneratorModel,
    pos: WalkBatch,
    neg: WalkBatch,
    cfg: GenTrainConfig,
) -> list[float]:
    """Minibatch SGD on the contrastive objective; returns the per-step loss trace.

    Each epoch is a seeded shuffle of the positive pool; each positive
    minibatch is paired with an equally sized random draw from *neg*.
    """
    if len(pos) == 0:
        raise ValueError("generator training needs a non-empty positive pool")
    if cfg.mu > 0 and len(neg) == 0:
        raise ValueError("generator training with mu > 0 needs a non-empty negative pool")
    if len(neg) and neg.length != pos.length:
        raise ValueError(f"pool walk lengths differ: {pos.length} vs {neg.length}")
    if pos.length > model.max_len:
        raise ValueError(f"walk length {pos.length} exceeds model context {model.max_len}")

    pos_arr = torch.as_tensor(pos.as_array())
    neg_arr = torch.as_tensor(neg.as_array()) if len(neg) else None
    rng = derive_rng(cfg.seed, "generator")
    opt = torch.optim.SGD(model.parameters(), lr=cfg.lr)
    model.train()
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pos_arr))
        for start in range(0, len(order), cfg.batch_size):
            if cfg.max_steps is not None and len(trace) >= cfg.max_steps:
                return trace
            idx = order[start : start + cfg.batch_size]
            neg_batch = None
            if neg_arr is not None and cfg.mu > 0:
                neg_batch = neg_arr[rng.integers(len(neg_arr), size=len(idx))]
            loss, parts = contrastive_loss(
                model, pos_arr[idx], neg_batch, cfg.mu, cfg.log_floor
            )
            if not torch.isfinite(loss):
                raise TrainingAbort("generator", len(trace), {"loss": float(loss), **parts})
            opt.zero_grad()
            loss.backward()
            opt.step()
            trace.append(float(loss))
        if trace:
            log.debug("generator epoch %d: last loss %.4f", epoch + 1, trace[-1])
    return trace


@torch.no_grad()
def next_node_distribution(model: GeneratorModel, prefix: Sequence[int]) -> np.ndarray:
    """Probability vector over all nodes for the node following *prefix*."""
    if len(prefix) == 0:
        raise ValueError("prefix must contain at least one node")
    if len(prefix) > model.max_len - 1:
        raise ValueError(f"prefix length {len(prefix)} exceeds {model.max_len - 1}")
    model.eval()
    logits = model(torch.as_tensor([list(prefix)], dtype=torch.long))[0, -1]
    return torch.softmax(logits.double(), dim=-1).numpy()


@torch.no_grad()
def walk_log_likelihood(model: GeneratorModel, walk: Walk | Sequence[int]) -> float:
    """``sum_{t=2..T} log g(w_t | w_<t)`` in double precision."""
    nodes = list(walk.nodes if isinstance(walk, Walk) else walk)
    if len(nodes) < 2:
        return 0.0
    model.eval()
    seq = torch.as_tensor([nodes], dtype=torch.long)
    logp = F.log_softmax(model(seq[:, :-1]).double(), dim=-1)
    return float(logp.gather(-1, seq[:, 1:].unsqueeze(-1)).sum())


@torch.no_grad()
def generate_walks(
    model: GeneratorModel,
    count: int,
    length: int,
    start_dist: np.ndarray,
    rng: np.random.Generator,
    *,
    role: str = "negative",
) -> WalkBatch:
    """Sample *count* walks autoregressively; starts are drawn from *start_dist*."""
    probs = np.asarray(start_dist, dtype=np.float64)
    if probs.shape != (model.n,) or not np.isfinite(probs).all() or (probs < 0).any():
        raise ValueError("start distribution must be a finite non-negative vector over all nodes")
    if probs.sum() <= 0:
        raise ValueError("start distribution is degenerate (all zero)")
    if not 2 <= length <= model.max_len:
        raise ValueError(f"walk length must lie in [2, {model.max_len}], got {length}")
    probs = probs / probs.sum()
    if count == 0:
        return WalkBatch(walks=[], role=role)

    model.eval()
    walks: list[Walk] = []
    for start in range(0, count, _GENERATION_CHUNK):
        size = min(_GENERATION_CHUNK, count - start)
        seqs = torch.as_tensor(rng.choice(model.n, size=size, p=probs)).unsqueeze(1)
        for _ in range(length - 1):
            step = torch.softmax(model(seqs)[:, -1].double(), dim=-1).numpy()
            cum = np.cumsum(step, axis=1)
            draw = rng.random(size)[:, None] * cum[:, -1:]
            nxt = np.minimum((cum <= draw).sum(axis=1), model.n - 1)
            seqs = torch.cat([seqs, torch.as_tensor(nxt).unsqueeze(1)], dim=1)
        walks.extend(
            Walk(nodes=tuple(int(x) for x in row), origin=WalkOrigin.generated)
            for row in seqs.tolist()
        )
    return WalkBatch(walks=walks, role=role)


@torch.no_grad()
def pool_objective(
    model: GeneratorModel,
    pos: WalkBatch,
    neg: WalkBatch,
    mu: float,
    log_floor: float,
    chunk: int = 256,
) -> float:
    """The contrastive objective over whole pools, evaluated in chunks."""
    model.eval()

    def _mean_ll(batch: WalkBatch, floor: float | None) -> float:
        arr = torch.as_tensor(batch.as_array())
        total = 0.0
        for start in range(0, len(arr), chunk):
            logp = walk_log_probs(model, arr[start : start + chunk]).double()
            if floor is not None:
                logp = logp.clamp(min=floor)
            total += float(logp.sum())
        return total / len(arr)

    value = -_mean_ll(pos, None)
    if mu > 0 and len(neg):
        value += mu * _mean_ll(neg, log_floor)
    return value
