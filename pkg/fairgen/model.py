from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
import scipy.sparse as sp


@dataclass(slots=True)
class Warning:
    code: str
    message: str
    context: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Graph, labels, groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class Graph:
    """Immutable undirected simple graph stored as sorted CSR adjacency.

    Node ids are dense ``0..n-1``; ``node_ids[i]`` is the external token the
    node was read as (or ``str(i)`` for generated graphs).
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    node_ids: tuple[str, ...]
    id_map: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "id_map", {tok: i for i, tok in enumerate(self.node_ids)})

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        node_ids: Iterable[str] | None = None,
    ) -> Graph:
        """Build a graph from node pairs, dropping self-loops and duplicates."""
        if n < 0:
            raise ValueError(f"node count must be non-negative, got {n}")
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
            raise ValueError(f"edge ({bad[0]}, {bad[1]}) references a node outside [0, {n})")
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(lo) else np.empty((0, 2), int)
        both = np.concatenate([und, und[:, ::-1]]) if len(und) else und
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, int)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        ids = tuple(node_ids) if node_ids is not None else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise ValueError(f"expected {n} external node ids, got {len(ids)}")
        return cls(n=n, indptr=indptr, indices=both[:, 1].astype(np.int64), node_ids=ids)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def edge_array(self) -> np.ndarray:
        """Return the ``(m, 2)`` array of edges with ``u < v``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        mask = rows < self.indices
        return np.stack([rows[mask], self.indices[mask]], axis=1)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((int(u), int(v)) for u, v in self.edge_array())

    def isolated_nodes(self) -> list[int]:
        return [int(u) for u in np.flatnonzero(self.degrees() == 0)]

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def induced(self, nodes: Iterable[int]) -> Graph:
        """Induced subgraph on *nodes*, relabelled densely in ascending id order."""
        keep = sorted(set(int(u) for u in nodes))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        edges = self.edge_array()
        if len(edges):
            edges = remap[edges]
            edges = edges[(edges >= 0).all(axis=1)]
        return Graph.from_edges(len(keep), edges, node_ids=[self.node_ids[u] for u in keep])


@dataclass(slots=True)
class LabelSet:
    """Partial node labelling: node id -> class in ``[0, num_classes)``."""

    entries: dict[int, int]
    num_classes: int

    def __post_init__(self) -> None:
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {self.num_classes}")
        for node, cls in self.entries.items():
            if not 0 <= cls < self.num_classes:
                raise ValueError(
                    f"node {node} has class {cls} outside [0, {self.num_classes})"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def nodes(self) -> list[int]:
        return sorted(self.entries)

    def by_class(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {c: [] for c in range(self.num_classes)}
        for node in self.nodes():
            out[self.entries[node]].append(node)
        return out

    def covers_all_classes(self) -> bool:
        return all(self.by_class().values())

    def merged(self, extra: LabelSet) -> LabelSet:
        """Union with *extra*; existing entries are never overwritten."""
        entries = dict(extra.entries)
        entries.update(self.entries)
        return LabelSet(entries=entries, num_classes=self.num_classes)

    def check_graph(self, g: Graph) -> None:
        for node in self.entries:
            if not 0 <= node < g.n:
                raise ValueError(f"labelled node {node} is not in the graph (n={g.n})")


@dataclass(frozen=True, slots=True)
class GroupMembership:
    """Protected group S+ over ``n`` nodes; the unprotected group is the exact complement."""

    n: int
    protected: frozenset[int]

    def __post_init__(self) -> None:
        bad = [u for u in self.protected if not 0 <= u < self.n]
        if bad:
            raise ValueError(f"protected node {min(bad)} is not in the graph (n={self.n})")

    @property
    def unprotected(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.protected

    def is_protected(self, x: int) -> bool:
        return x in self.protected

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[list(self.protected)] = True
        return out

    def require_both_nonempty(self) -> None:
        if not self.protected:
            raise ValueError("protected group is empty")
        if len(self.protected) == self.n:
            raise ValueError("unprotected group is empty")


@dataclass(frozen=True, slots=True)
class TransitionMatrix:
    """Lazy-walk matrix ``(A D^-1 + I) / 2`` (column-stochastic, CSC)."""

    matrix: sp.csc_matrix
    isolated: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# Walks
# ---------------------------------------------------------------------------


class WalkOrigin(str, Enum):
    """Provenance of a walk."""

    uniform = "uniform"
    label = "label"
    generated = "generated"
    noise = "noise"


@dataclass(frozen=True, slots=True)
class Walk:
    nodes: tuple[int, ...]
    origin: WalkOrigin
    label_class: int | None = None

    @property
    def tag(self) -> str:
        if self.origin is WalkOrigin.label and self.label_class is not None:
            return f"label:{self.label_class}"
        return self.origin.value

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(slots=True)
class WalkBatch:
    walks: list[Walk]
    role: str = "positive"  # positive (N+) or negative (N-)

    def __post_init__(self) -> None:
        if self.role not in ("positive", "negative"):
            raise ValueError(f"unknown walk batch role {self.role!r}")
        lengths = {len(w) for w in self.walks}
        if len(lengths) > 1:
            raise ValueError(f"walks in one batch must share a length, got {sorted(lengths)}")

    def __len__(self) -> int:
        return len(self.walks)

    @property
    def length(self) -> int | None:
        return len(self.walks[0]) if self.walks else None

    def as_array(self) -> np.ndarray:
        if not self.walks:
            return np.empty((0, 0), dtype=np.int64)
        return np.asarray([w.nodes for w in self.walks], dtype=np.int64)

    def extend(self, other: WalkBatch, cap: int | None = None) -> None:
        """Append *other*; keep only the newest *cap* walks when a cap is set."""
        if other.walks and self.walks and other.length != self.length:
            raise ValueError(f"walk length mismatch: {self.length} vs {other.length}")
        self.walks.extend(other.walks)
        if cap is not None and len(self.walks) > cap:
            del self.walks[: len(self.walks) - cap]

    def node_frequencies(self, n: int) -> np.ndarray:
        arr = self.as_array()
        return np.bincount(arr.ravel(), minlength=n) if arr.size else np.zeros(n, np.int64)

    def start_frequencies(self, n: int) -> np.ndarray:
        arr = self.as_array()
        return np.bincount(arr[:, 0], minlength=n) if arr.size else np.zeros(n, np.int64)


@dataclass(frozen=True, slots=True)
class SamplerConfig:
    walk_length: int = 10  # T
    mix_ratio: float = 0.5  # r
    p: float = 1.0
    q: float = 1.0
    num_walks: int = 500  # K
    seed: int = 0
    class_balanced: bool = False

    def __post_init__(self) -> None:
        if self.walk_length < 2:
            raise ValueError(f"walk_length must be >= 2, got {self.walk_length}")
        if not 0.0 <= self.mix_ratio <= 1.0:
            raise ValueError(f"mix_ratio must lie in [0, 1], got {self.mix_ratio}")
        if self.p <= 0 or self.q <= 0:
            raise ValueError(f"p and q must be positive, got p={self.p}, q={self.q}")
        if self.num_walks < 0:
            raise ValueError(f"num_walks must be non-negative, got {self.num_walks}")


# ---------------------------------------------------------------------------
# Embeddings, generator, fair learner
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class EmbeddingTable:
    vectors: np.ndarray  # (n, d)

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise ValueError(f"embedding table must be 2-D, got shape {self.vectors.shape}")
        if not np.isfinite(self.vectors).all():
            raise ValueError("embedding table contains non-finite entries")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True, slots=True)
class EmbeddingConfig:
    dim: int = 100
    window: int = 5
    neg_samples: int = 5
    epochs: int = 1
    walks_per_node: int = 10
    lr: float = 0.025
    batch_size: int = 512

    def __post_init__(self) -> None:
        if self.dim < 1 or self.window < 1 or self.neg_samples < 1:
            raise ValueError("embedding dim, window and neg_samples must be >= 1")
        if self.epochs < 0 or self.walks_per_node < 1 or self.batch_size < 1:
            raise ValueError("embedding epochs must be >= 0; walks_per_node, batch_size >= 1")


@dataclass(frozen=True, slots=True)
class GenTrainConfig:
    mu: float = 0.1
    log_floor: float = -10.0
    epochs: int = 20
    batch_size: int = 128
    lr: float = 0.01
    seed: int = 0
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.log_floor >= 0:
            raise ValueError(f"log_floor must be negative, got {self.log_floor}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError(f"max_steps must be >= 0, got {self.max_steps}")


@dataclass(frozen=True, slots=True)
class FairLossWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(slots=True)
class SelfPacedState:
    """Self-paced selection vectors v^(c) stacked as an ``(n, C)`` boolean matrix.

    ``log_probs`` holds the discriminator log-probabilities the selection was
    made from (``None`` before the first update).
    """

    selected: np.ndarray
    truth: LabelSet
    lam: float
    cycle: int = 0
    lambda0: float = 0.105
    growth: float = 1.5
    log_probs: np.ndarray | None = None

    @classmethod
    def initial(
        cls, truth: LabelSet, n: int, lambda0: float = 0.105, growth: float = 1.5
    ) -> SelfPacedState:
        if lambda0 <= 0:
            raise ValueError(f"lambda0 must be positive, got {lambda0}")
        if growth <= 1:
            raise ValueError(f"lambda growth must exceed 1, got {growth}")
        selected = np.zeros((n, truth.num_classes), dtype=bool)
        for node, cls_ in truth.entries.items():
            selected[node, cls_] = True
        return cls(selected=selected, truth=truth, lam=lambda0, lambda0=lambda0, growth=growth)

    def lambda_at(self, cycle: int) -> float:
        return self.lambda0 * self.growth ** (cycle - 1)

    @property
    def num_classes(self) -> int:
        return self.truth.num_classes


@dataclass(frozen=True, slots=True)
class PseudoLabel:
    """One audit row: a node promoted to class *cls* during *cycle*."""

    node: int
    cls: int
    confidence: float  # Pr(y_hat = cls | x)
    cycle: int


@dataclass(slots=True)
class ScoreMatrix:
    """Symmetric edge-count accumulator B with a zero diagonal."""

    n: int
    counts: sp.csr_matrix

    def pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(u, v, count)`` for the upper triangle, sorted by ``(u, v)``."""
        upper = sp.triu(self.counts, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return (
            upper.row[order].astype(np.int64),
            upper.col[order].astype(np.int64),
            upper.data[order].astype(np.int64),
        )

    def get(self, u: int, v: int) -> int:
        return int(self.counts[u, v])

    @property
    def total(self) -> int:
        return int(sp.triu(self.counts, k=1).sum())


@dataclass(slots=True)
class CycleRecord:
    """Summary of one self-paced cycle of the training loop."""

    cycle: int
    lam: float
    generator_losses: list[float] = field(default_factory=list)
    discriminator_losses: list[dict[str, float]] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)  # J_G, J_P, J_F, J_L, J_S, J
    positive_pool: int = 0
    negative_pool: int = 0
    pseudo_labelled: int = 0
    selected: int = 0


# ---------------------------------------------------------------------------
# Reports and manifests
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class MetricRow:
    name: str
    original: float
    generated: float
    overall: float  # R
    protected: float  # R+
    flags: list[str] = field(default_factory=list)


@dataclass(slots=True)
class MetricReport:
    rows: list[MetricRow]
    metadata: dict = field(default_factory=dict)

    def row(self, name: str) -> MetricRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(slots=True)
class RunManifest:
    command: str
    seed: int
    version: str
    config: dict[str, str]
    inputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    outputs: list[str] = field(default_factory=list)


class TrainingAbort(RuntimeError):
    """A training loss went non-finite; carries the step and loss components."""

    def __init__(
        self,
        stage: str,
        step: int,
        components: dict[str, float],
        cycle: int | None = None,
    ) -> None:
        parts = ", ".join(f"{k}={v:.6g}" for k, v in components.items())
        where = f"cycle {cycle}, " if cycle is not None else ""
        super().__init__(f"{stage}: non-finite loss at {where}step {step} ({parts})")
        self.stage = stage
        self.step = step
        self.components = components
        self.cycle = cycle
