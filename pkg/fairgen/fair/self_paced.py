"""Closed-form self-paced selection and pseudo-label promotion."""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

import numpy as np

from fairgen.fair.discriminator import Discriminator, predict_log_probs
from fairgen.model import EmbeddingTable, Graph, LabelSet, PseudoLabel, SelfPacedState

log = logging.getLogger(__name__)


def select_by_threshold(log_probs: np.ndarray, lam: float) -> np.ndarray:
    """``v_i^c = 1`` iff ``-log Pr(y_hat_i = c | x_i) < lam`` (strict)."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return -np.asarray(log_probs, dtype=np.float64) < lam


def _pin_truth(selected: np.ndarray, truth: LabelSet) -> np.ndarray:
    out = selected.copy()
    for node, cls in truth.entries.items():
        out[node] = False
        out[node, cls] = True
    return out


def update_self_paced(
    d: Discriminator, feats: EmbeddingTable, sp: SelfPacedState
) -> SelfPacedState:
    """Recompute the selection from the current discriminator; lambda is left unchanged.

    Ground-truth rows are always their one-hot class.
    """
    log_probs = predict_log_probs(d, feats)
    if log_probs.shape != sp.selected.shape:
        raise ValueError(
            f"discriminator output {log_probs.shape} does not match state {sp.selected.shape}"
        )
    selected = _pin_truth(select_by_threshold(log_probs, sp.lam), sp.truth)
    return dataclasses.replace(sp, selected=selected, log_probs=log_probs)


def frozen_selection(sp: SelfPacedState) -> SelfPacedState:
    """Selection restricted to the ground-truth labels (no self-paced learning)."""
    return dataclasses.replace(sp, selected=_pin_truth(np.zeros_like(sp.selected), sp.truth))


def advance_lambda(sp: SelfPacedState, cycle: int) -> SelfPacedState:
    """Set lambda to the schedule value for *cycle* (1-based)."""
    if cycle < 1:
        raise ValueError(f"cycle index must be >= 1, got {cycle}")
    return dataclasses.replace(sp, lam=sp.lambda_at(cycle), cycle=cycle)


def pseudo_labels(sp: SelfPacedState) -> LabelSet:
    """Classes for unlabelled nodes with at least one selected class.

    The class is the most probable among the selected ones; ties go to the
    lowest class index. Ground-truth nodes are never included.
    """
    entries: dict[int, int] = {}
    if sp.log_probs is None:
        return LabelSet(entries=entries, num_classes=sp.num_classes)
    masked = np.where(sp.selected, sp.log_probs, -np.inf)
    best = masked.argmax(axis=1)
    for node in np.flatnonzero(sp.selected.any(axis=1)):
        node = int(node)
        if node in sp.truth.entries:
            continue
        entries[node] = int(best[node])
    return LabelSet(entries=entries, num_classes=sp.num_classes)


def audit_rows(sp: SelfPacedState, pseudo: LabelSet) -> list[PseudoLabel]:
    """Audit rows for *pseudo* with the discriminator confidence of each assignment."""
    if sp.log_probs is None:
        return []
    return [
        PseudoLabel(
            node=node,
            cls=cls,
            confidence=float(np.exp(sp.log_probs[node, cls])),
            cycle=sp.cycle,
        )
        for node, cls in sorted(pseudo.entries.items())
    ]


def write_audit(rows: list[PseudoLabel], g: Graph, path: str | Path) -> Path:
    """Write ``node<TAB>class<TAB>confidence<TAB>cycle`` lines with external node ids."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{g.node_ids[r.node]}\t{r.cls}\t{r.confidence:.6f}\t{r.cycle}" for r in rows]
    p.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return p
