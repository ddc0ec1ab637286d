"""Degree/transition-matrix algebra, conductance, ego networks and components."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _csgraph_components

from fairgen.model import Graph, TransitionMatrix


class IsolatedNodeError(ValueError):
    """A node with degree 0 where a walk or D^-1 needs it to have neighbors."""

    def __init__(self, node: int, token: str | None = None) -> None:
        label = f"{node} ({token!r})" if token is not None else str(node)
        super().__init__(f"node {label} is isolated (degree 0)")
        self.node = node


def _node_mask(g: Graph, s: Iterable[int]) -> np.ndarray:
    mask = np.zeros(g.n, dtype=bool)
    nodes = np.fromiter((int(u) for u in s), dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.n):
        raise ValueError(f"node set references nodes outside [0, {g.n})")
    mask[nodes] = True
    return mask


def transition_matrix(g: Graph, *, allow_isolated: bool = False) -> TransitionMatrix:
    """Lazy random-walk matrix ``M = (A D^-1 + I) / 2``.

    Isolated nodes are rejected unless *allow_isolated* is set, in which case
    their column is the unit vector ``e_i``.
    """
    deg = g.degrees().astype(np.float64)
    isolated = np.flatnonzero(deg == 0)
    if isolated.size and not allow_isolated:
        raise IsolatedNodeError(int(isolated[0]), g.node_ids[isolated[0]])
    inv = np.zeros(g.n)
    np.divide(1.0, deg, out=inv, where=deg > 0)
    walk = g.adjacency_matrix() @ sp.diags(inv)
    diag = np.full(g.n, 0.5)
    diag[isolated] = 1.0
    m = (0.5 * walk + sp.diags(diag)).tocsc()
    return TransitionMatrix(matrix=m, isolated=tuple(int(u) for u in isolated))


def volume(g: Graph, s: Iterable[int]) -> int:
    return int(g.degrees()[_node_mask(g, s)].sum())


def cut_size(g: Graph, s: Iterable[int]) -> int:
    """Number of edges with exactly one endpoint in *s*."""
    mask = _node_mask(g, s)
    edges = g.edge_array()
    if not len(edges):
        return 0
    return int(np.count_nonzero(mask[edges[:, 0]] != mask[edges[:, 1]]))


def conductance(g: Graph, s: Iterable[int]) -> float:
    """``cut(S, S̄) / min(vol(S), vol(S̄))`` for a proper non-empty subset *s*."""
    mask = _node_mask(g, s)
    k = int(mask.sum())
    if k == 0:
        raise ValueError("conductance is undefined for the empty set")
    if k == g.n:
        raise ValueError("conductance is undefined for the full node set")
    return _conductance_from_mask(g, mask)


def _conductance_from_mask(g: Graph, mask: np.ndarray) -> float:
    deg = g.degrees()
    vol_in = int(deg[mask].sum())
    vol_out = int(deg[~mask].sum())
    edges = g.edge_array()
    cut = int(np.count_nonzero(mask[edges[:, 0]] != mask[edges[:, 1]])) if len(edges) else 0
    if cut == 0:
        return 0.0
    denom = min(vol_in, vol_out)
    if denom == 0:
        raise ValueError("conductance is undefined: one side has zero volume")
    return cut / denom


def ego_subgraph(g: Graph, anchors: Iterable[int], hops: int = 1) -> Graph:
    """Induced subgraph on the anchors and every node within *hops* of one."""
    mask = _node_mask(g, anchors)
    if not mask.any():
        raise ValueError("ego network needs at least one anchor node")
    if hops < 0:
        raise ValueError(f"hops must be >= 0, got {hops}")
    adj = g.adjacency_matrix()
    frontier = mask.copy()
    for _ in range(hops):
        reached = (adj @ frontier.astype(np.float64)) > 0
        frontier = reached & ~mask
        mask |= reached
        if not frontier.any():
            break
    return g.induced(np.flatnonzero(mask))


def connected_components(g: Graph) -> list[set[int]]:
    """Partition of the nodes into components, ordered by smallest member."""
    if g.n == 0:
        return []
    _, labels = _csgraph_components(g.adjacency_matrix(), directed=False)
    groups: dict[int, set[int]] = {}
    for node, comp in enumerate(labels):
        groups.setdefault(int(comp), set()).add(node)
    return sorted(groups.values(), key=min)
