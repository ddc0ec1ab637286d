"""Slow pure-Python reference implementations of every statistic.

Used to cross-check the sparse fast paths on small graphs.
"""

from __future__ import annotations

import math
from collections import deque
from itertools import combinations

from fairgen.metrics.stats import Metric
from fairgen.model import Graph

MAX_ORACLE_NODES = 200


def _adjacency(g: Graph) -> list[set[int]]:
    return [set(int(x) for x in g.neighbors(u)) for u in range(g.n)]


def _bfs(adj: list[set[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def brute_force_oracles(g: Graph) -> dict[Metric, float | None]:
    """Every statistic by enumeration; ``None`` where the statistic is undefined."""
    if g.n > MAX_ORACLE_NODES:
        raise ValueError(f"oracles are limited to {MAX_ORACLE_NODES} nodes, got {g.n}")
    if g.n == 0:
        raise ValueError("oracles need a non-empty graph")
    adj = _adjacency(g)
    n = g.n
    deg = [len(a) for a in adj]
    m = sum(deg) // 2
    out: dict[Metric, float | None] = {}

    out[Metric.AD] = 2.0 * m / n

    seen: set[int] = set()
    sizes = []
    for u in range(n):
        if u not in seen:
            comp = _bfs(adj, u)
            seen.update(comp)
            sizes.append(len(comp))
    out[Metric.LCC] = float(max(sizes))
    out[Metric.NCC] = float(len(sizes))

    triangles = 0
    for a, b, c in combinations(range(n), 3):
        if b in adj[a] and c in adj[a] and c in adj[b]:
            triangles += 1
    out[Metric.TC] = float(triangles)

    positive = [d for d in deg if d > 0]
    if positive:
        d_min = min(positive)
        log_sum = sum(math.log(d / d_min) for d in positive)
        out[Metric.PLE] = 1.0 + len(positive) / log_sum if log_sum > 0 else None
    else:
        out[Metric.PLE] = None

    if m > 0:
        ordered = sorted(deg)
        weighted = sum((i + 1) * d for i, d in enumerate(ordered))
        out[Metric.GINI] = 2.0 * weighted / (n * sum(ordered)) - (n + 1) / n
    else:
        out[Metric.GINI] = None

    if m > 0 and n > 1:
        h = 0.0
        for d in deg:
            if d:
                share = d / (2.0 * m)
                h -= share * math.log(share)
        out[Metric.EDE] = h / math.log(n)
    else:
        out[Metric.EDE] = None

    total = 0
    pairs = 0
    for u in range(n):
        for w, dist in _bfs(adj, u).items():
            if w != u:
                total += dist
                pairs += 1
    out[Metric.ASPL] = total / pairs if pairs else None

    local = []
    for u in range(n):
        if deg[u] < 2:
            local.append(0.0)
            continue
        links = sum(1 for a, b in combinations(sorted(adj[u]), 2) if b in adj[a])
        local.append(links / (deg[u] * (deg[u] - 1) / 2))
    out[Metric.CC] = sum(local) / n
    return out
