"""Readers and writers for edge-list, label and protected-group files."""

from __future__ import annotations

import logging
from pathlib import Path

from fairgen.graph.core import IsolatedNodeError
from fairgen.model import Graph, GroupMembership, LabelSet

log = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Malformed or empty input file."""

    def __init__(self, message: str, path: str | Path | None = None, line_no: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line_no}: " if line_no is not None else f"{path}: "
        super().__init__(where + message)
        self.path = str(path) if path is not None else None
        self.line_no = line_no


def _content_lines(path: Path):
    """Yield ``(line_no, stripped_line)`` for non-blank, non-comment lines."""
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield line_no, line


def load_edge_list(
    path: str | Path,
    *,
    allow_isolated: bool = False,
    universe: Graph | None = None,
) -> Graph:
    """Read an undirected edge list.

    Dense ids are assigned by first appearance of each token. Duplicate
    edges (in either orientation) and self-loops are dropped. A node that
    only ever appears in a self-loop ends up isolated and is rejected unless
    *allow_isolated* is set.

    With *universe*, tokens are resolved through that graph's id map instead
    so a generated graph shares node ids with its source; isolated nodes are
    then allowed.
    """
    if universe is not None:
        return _load_in_universe(Path(path), universe)
    p = Path(path)
    ids: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    dropped_loops = 0
    for line_no, line in _content_lines(p):
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(
                f"expected two node tokens, got {len(tokens)}: {line!r}", p, line_no
            )
        u = ids.setdefault(tokens[0], len(ids))
        v = ids.setdefault(tokens[1], len(ids))
        if u == v:
            dropped_loops += 1
            continue
        pairs.append((u, v))

    if not ids:
        raise EdgeListError("edge list is empty", p)

    g = Graph.from_edges(len(ids), pairs, node_ids=list(ids))
    if dropped_loops or len(pairs) != g.m:
        log.debug(
            "%s: dropped %d self-loop(s) and %d duplicate edge(s)",
            p,
            dropped_loops,
            len(pairs) - g.m,
        )
    isolated = g.isolated_nodes()
    if isolated and not allow_isolated:
        raise IsolatedNodeError(isolated[0], g.node_ids[isolated[0]])
    return g


def _resolve(g: Graph, token: str, p: Path, line_no: int) -> int:
    try:
        return g.id_map[token]
    except KeyError:
        raise EdgeListError(f"unknown node {token!r}", p, line_no) from None


def _load_in_universe(p: Path, universe: Graph) -> Graph:
    pairs: list[tuple[int, int]] = []
    for line_no, line in _content_lines(p):
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(
                f"expected two node tokens, got {len(tokens)}: {line!r}", p, line_no
            )
        u = _resolve(universe, tokens[0], p, line_no)
        v = _resolve(universe, tokens[1], p, line_no)
        pairs.append((u, v))
    return Graph.from_edges(universe.n, pairs, node_ids=universe.node_ids)


def load_labels(path: str | Path, g: Graph, num_classes: int | None = None) -> LabelSet:
    """Read ``node<TAB>class`` lines. The class count defaults to ``max class + 1``."""
    p = Path(path)
    entries: dict[int, int] = {}
    for line_no, line in _content_lines(p):
        tokens = line.split("\t") if "\t" in line else line.split()
        if len(tokens) != 2:
            raise EdgeListError(f"expected 'node<TAB>class', got {line!r}", p, line_no)
        node = _resolve(g, tokens[0].strip(), p, line_no)
        try:
            cls = int(tokens[1])
        except ValueError:
            raise EdgeListError(f"class must be an integer, got {tokens[1]!r}", p, line_no) from None
        if cls < 0:
            raise EdgeListError(f"class must be non-negative, got {cls}", p, line_no)
        entries[node] = cls
    if not entries:
        raise EdgeListError("label file is empty", p)
    count = num_classes if num_classes is not None else max(entries.values()) + 1
    return LabelSet(entries=entries, num_classes=count)


def load_protected(path: str | Path, g: Graph) -> GroupMembership:
    """Read one protected node token per line."""
    p = Path(path)
    protected = {_resolve(g, line, p, line_no) for line_no, line in _content_lines(p)}
    return GroupMembership(n=g.n, protected=frozenset(protected))


def write_edge_list(g: Graph, path: str | Path) -> Path:
    """Write *g* as ``u v`` lines using external node ids."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# nodes={g.n} edges={g.m}"]
    lines.extend(f"{g.node_ids[u]} {g.node_ids[v]}" for u, v in g.edge_array())
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def write_labels(labels: LabelSet, g: Graph, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{g.node_ids[node]}\t{labels.entries[node]}" for node in labels.nodes()]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def write_protected(groups: GroupMembership, g: Graph, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [g.node_ids[u] for u in sorted(groups.protected)]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p
