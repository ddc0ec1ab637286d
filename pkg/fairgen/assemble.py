"""Score-matrix accumulation and fair thresholding into an output graph."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from fairgen.generator.sequence import GeneratorModel, generate_walks
from fairgen.model import Graph, GroupMembership, ScoreMatrix, Warning, WalkBatch
from fairgen.util.rng import derive_rng

log = logging.getLogger(__name__)

# Walks per accumulation chunk
_CHUNK = 4096


class AssemblyError(ValueError):
    """The score matrix cannot support an output graph."""


@dataclass(slots=True)
class AssemblyResult:
    graph: Graph
    warnings: list[Warning] = field(default_factory=list)
    phase_counts: dict[str, int] = field(default_factory=dict)


def _partial_counts(arr: np.ndarray, n: int) -> sp.csr_matrix:
    a, b = arr[:, :-1].ravel(), arr[:, 1:].ravel()
    keep = a != b
    a, b = a[keep], b[keep]
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    data = np.ones(len(rows), dtype=np.int64)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def accumulate_scores(walks: WalkBatch, n: int, *, threads: int = 1) -> ScoreMatrix:
    """Count adjacent node pairs over all walks; self-pairs are dropped."""
    arr = walks.as_array()
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        bad = int(arr[(arr < 0) | (arr >= n)][0])
        raise ValueError(f"walk node {bad} is outside [0, {n})")
    if arr.size == 0 or arr.shape[1] < 2:
        return ScoreMatrix(n=n, counts=sp.csr_matrix((n, n), dtype=np.int64))
    chunks = [arr[i : i + _CHUNK] for i in range(0, len(arr), _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _partial_counts(c, n), chunks))
    else:
        parts = [_partial_counts(c, n) for c in chunks]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    total.sum_duplicates()
    total.eliminate_zeros()
    return ScoreMatrix(n=n, counts=total.tocsr())


def generation_walk_count(m_target: int, walk_length: int, factor: float) -> int:
    """Walks needed for ``factor * m_target`` transitions."""
    return max(1, math.ceil(factor * m_target / (walk_length - 1)))


def generate_scores(
    model: GeneratorModel,
    m_target: int,
    start_dist: np.ndarray,
    *,
    walk_length: int,
    factor: float,
    seed: int,
    threads: int = 1,
) -> tuple[WalkBatch, ScoreMatrix]:
    count = generation_walk_count(m_target, walk_length, factor)
    log.info("generating %d walks for scoring", count)
    walks = generate_walks(
        model, count, walk_length, start_dist, derive_rng(seed, "assembly-walks"), role="negative"
    )
    return walks, accumulate_scores(walks, model.n, threads=threads)


def _ranked(B: ScoreMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Candidates by descending count, ties by ``(min id, max id)``."""
    u, v, c = B.pairs()
    order = np.lexsort((v, u, -c))
    return u[order], v[order], c[order]


def assemble(
    B: ScoreMatrix,
    g_orig: Graph,
    groups: GroupMembership,
    tol: float = 0.1,
    *,
    allow_uncovered: bool = False,
) -> AssemblyResult:
    """Threshold *B* into a graph with the original edge count.

    Phases, in priority order:

    1. coverage: every node of positive original degree gets its
       highest-scoring incident pair admitted, shared pairs once;
    2. protected volume: protected-incident pairs by descending score until
       the protected volume reaches ``(1 - tol)`` of the original;
    3. fill: remaining pairs by descending score up to the edge budget.

    Phase 3 never passes over a candidate, so every pair it admits scores at
    least as high as every pair left out.
    """
    if B.n != g_orig.n:
        raise AssemblyError(f"score matrix covers {B.n} nodes, graph has {g_orig.n}")
    u, v, c = _ranked(B)
    if len(u) == 0:
        raise AssemblyError("score matrix is all zero")

    n = g_orig.n
    m_target = g_orig.m
    prot = groups.mask()
    target_vol = float(g_orig.degrees()[prot].sum())
    lower = (1.0 - tol) * target_vol
    result = AssemblyResult(graph=g_orig)

    admitted = np.zeros(len(u), dtype=bool)
    gain = prot[u].astype(np.int64) + prot[v].astype(np.int64)
    volume = 0
    count = 0

    def _admit(i: int) -> None:
        nonlocal volume, count
        admitted[i] = True
        count += 1
        volume += int(gain[i])

    # Phase 1
    best = np.full(n, -1, dtype=np.int64)
    for i in range(len(u) - 1, -1, -1):
        best[u[i]] = best[v[i]] = i
    needs = np.flatnonzero(g_orig.degrees() > 0)
    uncovered = [int(x) for x in needs if best[x] < 0]
    if uncovered and not allow_uncovered:
        raise AssemblyError(
            f"{len(uncovered)} node(s) have no scored pair (first: {g_orig.node_ids[uncovered[0]]})"
        )
    if uncovered:
        _warn(result, "uncovered", f"{len(uncovered)} node(s) have no scored pair", nodes=uncovered)
    for x in needs:
        if best[x] >= 0 and not admitted[best[x]]:
            _admit(int(best[x]))
    result.phase_counts["coverage"] = count
    if count > m_target:
        _warn(
            result,
            "coverage-over-budget",
            f"coverage needs {count} edges, budget is {m_target}",
        )

    # Phase 2
    for i in np.flatnonzero(gain > 0):
        if volume >= lower or count >= m_target:
            break
        if not admitted[i]:
            _admit(int(i))
    result.phase_counts["protected"] = count - result.phase_counts["coverage"]

    # Phase 3
    for i in range(len(u)):
        if count >= m_target:
            break
        if not admitted[i]:
            _admit(i)
    result.phase_counts["fill"] = (
        count - result.phase_counts["coverage"] - result.phase_counts["protected"]
    )

    if count < m_target:
        _warn(
            result,
            "insufficient-support",
            f"score matrix supports only {count} of {m_target} edges",
        )
    edges = np.stack([u[admitted], v[admitted]], axis=1)
    result.graph = Graph.from_edges(n, edges, node_ids=g_orig.node_ids)
    log.info(
        "assembled %d edges (target %d); protected volume %d (original %d)",
        result.graph.m,
        m_target,
        volume,
        int(target_vol),
    )
    return result


def augment(B: ScoreMatrix, g_orig: Graph, fraction: float) -> AssemblyResult:
    """Insert the ``ceil(fraction * m)`` best-scored pairs that are not yet edges."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if B.n != g_orig.n:
        raise ValueError(f"score matrix covers {B.n} nodes, graph has {g_orig.n}")
    want = math.ceil(fraction * g_orig.m)
    u, v, _ = _ranked(B)
    novel = [(int(a), int(b)) for a, b in zip(u, v) if not g_orig.has_edge(int(a), int(b))]
    chosen = novel[:want]
    result = AssemblyResult(graph=g_orig)
    if len(chosen) < want:
        _warn(
            result,
            "insufficient-support",
            f"only {len(chosen)} novel scored pair(s) for {want} requested edges",
        )
    edges = np.concatenate([g_orig.edge_array(), np.asarray(chosen, dtype=np.int64).reshape(-1, 2)])
    result.graph = Graph.from_edges(g_orig.n, edges, node_ids=g_orig.node_ids)
    result.phase_counts["added"] = len(chosen)
    return result


def _warn(result: AssemblyResult, code: str, message: str, **context) -> None:
    log.warning("%s", message)
    result.warnings.append(Warning(code=code, message=message, context=context))


def write_scores(B: ScoreMatrix, path: str | Path) -> Path:
    """Write sorted ``i j count`` triples (dense ids, ``i < j``)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    u, v, c = B.pairs()
    lines = [f"# nodes={B.n}"]
    lines.extend(f"{a} {b} {k}" for a, b, k in zip(u.tolist(), v.tolist(), c.tolist()))
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def read_scores(path: str | Path) -> ScoreMatrix:
    p = Path(path)
    n: int | None = None
    rows: list[tuple[int, int, int]] = []
    for line_no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# nodes="):
                n = int(line.split("=", 1)[1])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{p}:{line_no}: expected 'i j count'")
        a, b, k = (int(x) for x in parts)
        if a == b or k < 0:
            raise ValueError(f"{p}:{line_no}: invalid score triple {line!r}")
        rows.append((a, b, k))
    if n is None:
        raise ValueError(f"{p}: missing '# nodes=' header")
    if not rows:
        return ScoreMatrix(n=n, counts=sp.csr_matrix((n, n), dtype=np.int64))
    arr = np.asarray(rows, dtype=np.int64)
    if arr[:, :2].min() < 0 or arr[:, :2].max() >= n:
        raise ValueError(f"{p}: node id outside [0, {n})")
    r = np.concatenate([arr[:, 0], arr[:, 1]])
    cidx = np.concatenate([arr[:, 1], arr[:, 0]])
    data = np.concatenate([arr[:, 2], arr[:, 2]])
    return ScoreMatrix(n=n, counts=sp.csr_matrix((data, (r, cidx)), shape=(n, n)))
