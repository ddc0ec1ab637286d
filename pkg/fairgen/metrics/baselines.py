"""Erdos-Renyi, Barabasi-Albert and planted-partition reference graphs."""

from __future__ import annotations

import networkx as nx
import numpy as np

from fairgen.model import Graph


def _nx_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**31 - 1))


def from_networkx(nxg: nx.Graph) -> Graph:
    """Dense-id graph from a networkx graph whose nodes are ``0..n-1``."""
    n = nxg.number_of_nodes()
    if sorted(nxg.nodes()) != list(range(n)):
        nxg = nx.convert_node_labels_to_integers(nxg, ordering="sorted")
    return Graph.from_edges(n, list(nxg.edges()))


def to_networkx(g: Graph) -> nx.Graph:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from((int(u), int(v)) for u, v in g.edge_array())
    return nxg


def er_generate(n: int, m: int, rng: np.random.Generator) -> Graph:
    """*m* distinct non-loop pairs chosen uniformly at random."""
    if n < 0 or m < 0:
        raise ValueError(f"n and m must be non-negative, got n={n}, m={m}")
    if m > n * (n - 1) // 2:
        raise ValueError(f"{m} edges do not fit in a simple graph on {n} nodes")
    return from_networkx(nx.gnm_random_graph(n, m, seed=_nx_seed(rng)))


def ba_generate(n: int, attach_k: int, rng: np.random.Generator) -> Graph:
    """Preferential attachment; each new node brings *attach_k* edges."""
    if not 1 <= attach_k < n:
        raise ValueError(f"attach_k must satisfy 1 <= attach_k < n, got {attach_k} (n={n})")
    return from_networkx(nx.barabasi_albert_graph(n, attach_k, seed=_nx_seed(rng)))


def planted_partition(
    sizes: list[int], p_in: float, p_out: float, rng: np.random.Generator
) -> Graph:
    """Stochastic block model with one in-block and one cross-block edge probability."""
    k = len(sizes)
    probs = [[p_in if i == j else p_out for j in range(k)] for i in range(k)]
    return from_networkx(nx.stochastic_block_model(sizes, probs, seed=_nx_seed(rng)))


def block_of(sizes: list[int]) -> np.ndarray:
    """Block index of every node of :func:`planted_partition`."""
    return np.repeat(np.arange(len(sizes)), sizes)
