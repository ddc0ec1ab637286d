"""Degree, component, triangle and path statistics over sparse adjacency."""

from __future__ import annotations

import logging
import math
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from fairgen.model import Graph

log = logging.getLogger(__name__)

# BFS sources per shortest-path call
_ASPL_CHUNK = 256


class Metric(str, Enum):
    AD = "AD"  # average degree
    LCC = "LCC"  # largest connected component size
    TC = "TC"  # triangle count
    PLE = "PLE"  # power-law exponent
    GINI = "GINI"
    EDE = "EDE"  # edge distribution entropy
    ASPL = "ASPL"  # average shortest path length
    NCC = "NCC"  # number of connected components
    CC = "CC"  # mean local clustering coefficient


class MetricUndefinedError(ValueError):
    def __init__(self, metric: Metric | str, reason: str) -> None:
        name = metric.value if isinstance(metric, Metric) else str(metric)
        super().__init__(f"{name} undefined: {reason}")
        self.metric = name
        self.reason = reason


def _require_nodes(g: Graph, metric: Metric) -> None:
    if g.n == 0:
        raise MetricUndefinedError(metric, "graph has no nodes")


def average_degree(g: Graph) -> float:
    _require_nodes(g, Metric.AD)
    return 2.0 * g.m / g.n


def component_labels(g: Graph) -> tuple[int, np.ndarray]:
    return connected_components(g.adjacency_matrix(), directed=False)


def largest_component_size(g: Graph) -> int:
    _require_nodes(g, Metric.LCC)
    _, labels = component_labels(g)
    return int(np.bincount(labels).max())


def component_count(g: Graph) -> int:
    _require_nodes(g, Metric.NCC)
    count, _ = component_labels(g)
    return int(count)


def node_triangles(g: Graph) -> np.ndarray:
    """Triangles through each node: ``diag(A^3) / 2``."""
    a = g.adjacency_matrix()
    paths = (a @ a).multiply(a)
    return np.asarray(paths.sum(axis=1)).ravel() / 2.0


def triangle_count(g: Graph) -> int:
    _require_nodes(g, Metric.TC)
    return int(round(node_triangles(g).sum() / 3.0))


def power_law_exponent(g: Graph) -> float:
    """``1 + n / sum_u log(d(u) / d_min)`` over nodes of positive degree."""
    _require_nodes(g, Metric.PLE)
    deg = g.degrees()
    deg = deg[deg > 0].astype(np.float64)
    if deg.size == 0:
        raise MetricUndefinedError(Metric.PLE, "graph has no edges")
    total = float(np.log(deg / deg.min()).sum())
    if total == 0.0:
        raise MetricUndefinedError(Metric.PLE, "all degrees are equal (regular graph)")
    return 1.0 + deg.size / total


def gini(g: Graph) -> float:
    """Gini coefficient of the ascending degree sequence (1-based ranks)."""
    _require_nodes(g, Metric.GINI)
    deg = np.sort(g.degrees()).astype(np.float64)
    total = deg.sum()
    if total == 0:
        raise MetricUndefinedError(Metric.GINI, "graph has no edges")
    n = len(deg)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * (ranks * deg).sum() / (n * total) - (n + 1) / n)


def edge_distribution_entropy(g: Graph) -> float:
    """Degree entropy normalised by ``ln n``; the denominator is the degree sum ``2m``."""
    _require_nodes(g, Metric.EDE)
    if g.n < 2:
        raise MetricUndefinedError(Metric.EDE, "needs at least two nodes")
    if g.m == 0:
        raise MetricUndefinedError(Metric.EDE, "graph has no edges")
    share = g.degrees().astype(np.float64) / (2.0 * g.m)
    share = share[share > 0]
    return float(-(share * np.log(share)).sum() / math.log(g.n))


def aspl_details(g: Graph) -> tuple[float, int]:
    """Mean shortest-path length over reachable ordered pairs, and the unreachable pair count."""
    _require_nodes(g, Metric.ASPL)
    a = g.adjacency_matrix()
    total = 0.0
    reachable = 0
    for start in range(0, g.n, _ASPL_CHUNK):
        sources = np.arange(start, min(start + _ASPL_CHUNK, g.n))
        dist = shortest_path(a, directed=False, unweighted=True, indices=sources)
        finite = np.isfinite(dist)
        finite[np.arange(len(sources)), sources] = False
        total += float(dist[finite].sum())
        reachable += int(finite.sum())
    unreachable = g.n * (g.n - 1) - reachable
    if reachable == 0:
        raise MetricUndefinedError(Metric.ASPL, "no pair of nodes is connected")
    return total / reachable, unreachable


def average_shortest_path_length(g: Graph) -> float:
    return aspl_details(g)[0]


def clustering_coefficient(g: Graph) -> float:
    """Mean local clustering; nodes of degree < 2 contribute 0."""
    _require_nodes(g, Metric.CC)
    deg = g.degrees().astype(np.float64)
    tri = node_triangles(g)
    pairs = deg * (deg - 1) / 2.0
    local = np.divide(tri, pairs, out=np.zeros_like(tri), where=pairs > 0)
    return float(local.mean())


_DISPATCH = {
    Metric.AD: average_degree,
    Metric.LCC: largest_component_size,
    Metric.TC: triangle_count,
    Metric.PLE: power_law_exponent,
    Metric.GINI: gini,
    Metric.EDE: edge_distribution_entropy,
    Metric.ASPL: average_shortest_path_length,
    Metric.NCC: component_count,
    Metric.CC: clustering_coefficient,
}


def metric(f_m: Metric | str, g: Graph) -> float:
    """Value of statistic *f_m* on *g*; raises :class:`MetricUndefinedError`."""
    return float(_DISPATCH[Metric(f_m)](g))


def all_metrics(g: Graph) -> dict[Metric, float | None]:
    """Every statistic, with ``None`` where undefined."""
    out: dict[Metric, float | None] = {}
    for m in Metric:
        try:
            out[m] = metric(m, g)
        except MetricUndefinedError as e:
            log.debug("%s", e)
            out[m] = None
    return out
