"""Discriminator d_omega and the fair-learner loss terms.

``J_P`` is the cost-sensitive prediction loss, ``J_L`` the self-paced
label-propagation loss and ``J_F`` the statistical-parity regularizer.
Loss functions return tensors so they can be differentiated directly.
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
    FairLossWeights,
    GroupMembership,
    LabelSet,
    SelfPacedState,
    TrainingAbort,
)
from fairgen.util.rng import torch_seeded

log = logging.getLogger(__name__)

# Lower clamp on log-probabilities
LOG_FLOOR = -30.0


class Discriminator(nn.Module):
    """Three affine layers ``d -> h -> h -> C`` with ReLU between them."""

    def __init__(self, in_dim: int, hidden: int = 64, num_classes: int = 2) -> None:
        super().__init__()
        if num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {num_classes}")
        self.in_dim = in_dim
        self.hidden = hidden
        self.num_classes = num_classes
        self.net = nn.Sequential(
            nn.Linear(in_dim, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def log_probs(self, x: torch.Tensor) -> torch.Tensor:
        """``log Pr(y_hat = c | x)`` clamped at :data:`LOG_FLOOR`."""
        return F.log_softmax(self.net(x), dim=-1).clamp(min=LOG_FLOOR)


def build_discriminator(in_dim: int, num_classes: int, *, hidden: int = 64, seed: int) -> Discriminator:
    with torch_seeded(seed):
        return Discriminator(in_dim, hidden=hidden, num_classes=num_classes)


def features(feats: EmbeddingTable | torch.Tensor, d: Discriminator) -> torch.Tensor:
    """Embedding table as a tensor in the discriminator's parameter dtype."""
    dtype = next(d.parameters()).dtype
    if isinstance(feats, torch.Tensor):
        return feats.to(dtype)
    if feats.dim != d.in_dim:
        raise ValueError(f"feature dim {feats.dim} does not match discriminator input {d.in_dim}")
    return torch.as_tensor(feats.vectors, dtype=dtype)


def cost_weight(x: int, groups: GroupMembership) -> float:
    """``1/|S+|`` for protected nodes, ``1/|S-|`` otherwise."""
    groups.require_both_nonempty()
    if groups.is_protected(x):
        return 1.0 / len(groups.protected)
    return 1.0 / (groups.n - len(groups.protected))


def cost_weights(groups: GroupMembership) -> np.ndarray:
    """Vector of :func:`cost_weight` over all nodes."""
    groups.require_both_nonempty()
    mask = groups.mask()
    n_pos = int(mask.sum())
    return np.where(mask, 1.0 / n_pos, 1.0 / (groups.n - n_pos))


def parity_terms(
    d: Discriminator,
    feats: EmbeddingTable | torch.Tensor,
    groups: GroupMembership,
    nodes: Sequence[int] | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-class group means ``(m+, m-)`` of log-probabilities.

    With *nodes*, the means are estimated on that subset; each group must
    still be represented in it.
    """
    groups.require_both_nonempty()
    mask = torch.as_tensor(groups.mask())
    x = features(feats, d)
    if nodes is not None:
        idx = torch.as_tensor(np.asarray(nodes, dtype=np.int64))
        x, mask = x[idx], mask[idx]
        if not mask.any() or mask.all():
            raise ValueError("parity estimate needs both groups present in the node subset")
    logp = d.log_probs(x)
    return logp[mask].mean(dim=0), logp[~mask].mean(dim=0)


def fairness_loss(m_plus, m_minus, gamma: float):
    """``gamma * sum_c |m+_c - m-_c|`` on tensors or arrays."""
    if len(m_plus) != len(m_minus):
        raise ValueError(f"parity vectors differ in length: {len(m_plus)} vs {len(m_minus)}")
    if isinstance(m_plus, torch.Tensor):
        return gamma * (m_plus - m_minus).abs().sum()
    return gamma * float(np.abs(np.asarray(m_plus) - np.asarray(m_minus)).sum())


def prediction_loss(
    d: Discriminator,
    feats: EmbeddingTable | torch.Tensor,
    labels: LabelSet,
    groups: GroupMembership,
    alpha: float,
    nodes: Sequence[int] | None = None,
) -> torch.Tensor:
    """``alpha * sum_x xi_x * CE(Pr(.|x), y_x)`` over labelled nodes (or the *nodes* subset)."""
    if len(labels) == 0:
        raise ValueError("prediction loss needs at least one labelled node")
    if labels.num_classes > d.num_classes:
        raise ValueError(
            f"label classes ({labels.num_classes}) exceed discriminator outputs ({d.num_classes})"
        )
    chosen = labels.nodes() if nodes is None else list(nodes)
    missing = [u for u in chosen if u not in labels.entries]
    if missing:
        raise ValueError(f"node {missing[0]} has no label")
    idx = torch.as_tensor(chosen, dtype=torch.long)
    target = torch.as_tensor([labels.entries[u] for u in chosen], dtype=torch.long)
    x = features(feats, d)
    xi = torch.as_tensor(cost_weights(groups)[chosen], dtype=x.dtype)
    logp = d.log_probs(x[idx])
    nll = -logp.gather(1, target.unsqueeze(1)).squeeze(1)
    return alpha * (xi * nll).sum()


def label_prop_loss(
    d: Discriminator,
    feats: EmbeddingTable | torch.Tensor,
    sp: SelfPacedState | np.ndarray,
    beta: float,
) -> torch.Tensor:
    """``-beta * sum_i sum_c v_i^c log Pr(y_hat_i = c | x_i)``."""
    selected = sp.selected if isinstance(sp, SelfPacedState) else np.asarray(sp, dtype=bool)
    x = features(feats, d)
    rows = np.flatnonzero(selected.any(axis=1))
    if rows.size == 0:
        return torch.zeros((), dtype=x.dtype)
    v = torch.as_tensor(selected[rows], dtype=x.dtype)
    logp = d.log_probs(x[torch.as_tensor(rows)])
    return -beta * (v * logp).sum()


def discriminator_objective(
    d: Discriminator,
    feats: EmbeddingTable | torch.Tensor,
    labels: LabelSet,
    groups: GroupMembership,
    sp: SelfPacedState,
    weights: FairLossWeights,
    nodes: Sequence[int] | None = None,
    *,
    minibatch_parity: bool = False,
) -> dict[str, torch.Tensor]:
    """``J_P``, ``J_L`` and ``J_F`` plus their sum under key ``total``.

    ``J_P`` covers *nodes* (all labelled nodes when ``None``); ``J_F`` uses
    the full groups unless *minibatch_parity* is set.
    """
    j_p = prediction_loss(d, feats, labels, groups, weights.alpha, nodes)
    j_l = label_prop_loss(d, feats, sp, weights.beta)
    parity_nodes = nodes if minibatch_parity else None
    m_plus, m_minus = parity_terms(d, feats, groups, parity_nodes)
    j_f = fairness_loss(m_plus, m_minus, weights.gamma)
    return {"J_P": j_p, "J_L": j_l, "J_F": j_f, "total": j_p + j_l + j_f}


def train_discriminator_step(
    d: Discriminator,
    feats: EmbeddingTable | torch.Tensor,
    labels: LabelSet,
    groups: GroupMembership,
    sp: SelfPacedState,
    weights: FairLossWeights,
    batch: Sequence[int],
    optimizer: torch.optim.Optimizer,
    *,
    step: int = 0,
    minibatch_parity: bool = False,
) -> dict[str, float]:
    """One SGD step on ``J_P + J_L + J_F``; returns the pre-step loss components."""
    if len(batch) == 0:
        raise ValueError("discriminator batch is empty")
    d.train()
    parts = discriminator_objective(
        d, feats, labels, groups, sp, weights, batch, minibatch_parity=minibatch_parity
    )
    values = {k: float(v) for k, v in parts.items()}
    if not all(np.isfinite(v) for v in values.values()):
        raise TrainingAbort("discriminator", step, values)
    optimizer.zero_grad()
    parts["total"].backward()
    optimizer.step()
    return values


@torch.no_grad()
def predict_log_probs(d: Discriminator, feats: EmbeddingTable | torch.Tensor) -> np.ndarray:
    """Clamped log-probabilities for every node as a float64 ``(n, C)`` array."""
    d.eval()
    return d.log_probs(features(feats, d)).double().numpy()
