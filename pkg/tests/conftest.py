import subprocess
import sys
from collections.abc import Callable
from pathlib import Path

import pytest

from fairgen.model import Graph, GroupMembership, LabelSet
from tests.builders import (
    build_bridge_graph,
    build_groups,
    build_labels,
    build_planted_partition,
    write_graph_files,
)


@pytest.fixture
def bridge_graph() -> Graph:
    """Two 4-cliques joined by the edge (3, 4)."""
    return build_bridge_graph(4)


@pytest.fixture(scope="session")
def sbm() -> tuple[Graph, LabelSet, GroupMembership]:
    """A 40-node two-block graph; the small block is protected and half of each block is labelled."""
    g, blocks = build_planted_partition((30, 10), 0.3, 0.05, seed=11)
    entries = {u: int(blocks[u]) for u in range(g.n) if u % 2 == 0}
    protected = [u for u in range(g.n) if blocks[u] == 1]
    return g, build_labels(entries, 2), build_groups(g.n, protected)


@pytest.fixture
def sbm_files(tmp_path: Path, sbm) -> dict[str, Path]:
    """The session SBM written as edge-list, label and protected files."""
    g, labels, groups = sbm
    if g.isolated_nodes():
        pytest.skip("planted partition sample has isolated nodes")
    return write_graph_files(tmp_path, g, labels, sorted(groups.protected))


@pytest.fixture
def cli_runner() -> Callable[..., subprocess.CompletedProcess[str]]:
    """Return helper to invoke `python -m fairgen.cli` consistently in tests."""

    def _run(*args: str, timeout: int = 300, env: dict | None = None) -> subprocess.CompletedProcess[str]:
        return subprocess.run(
            [sys.executable, "-m", "fairgen.cli", *args],
            capture_output=True,
            text=True,
            timeout=timeout,
            env=env,
        )

    return _run
