"""Tests for the Erdos-Renyi, Barabasi-Albert and planted-partition generators."""

import numpy as np
import pytest

from fairgen.metrics.baselines import (
    ba_generate,
    block_of,
    er_generate,
    from_networkx,
    planted_partition,
    to_networkx,
)
from fairgen.util.rng import derive_rng
from tests.builders import build_bridge_graph

pytestmark = pytest.mark.unit


class TestErdosRenyi:
    def test_exact_counts(self) -> None:
        """Erdos-Renyi output should have exactly the requested node and edge counts."""
        g = er_generate(1005, 25571, derive_rng(1, "baseline", "er"))
        assert (g.n, g.m) == (1005, 25571)

    def test_seeded(self) -> None:
        """The same seed should give the same graph; another seed should not."""
        a = er_generate(50, 120, derive_rng(4))
        b = er_generate(50, 120, derive_rng(4))
        c = er_generate(50, 120, derive_rng(5))
        assert a.edges == b.edges
        assert a.edges != c.edges

    def test_complete_graph_fits(self) -> None:
        """Asking for every possible edge should give the complete graph."""
        assert er_generate(5, 10, derive_rng(0)).m == 10

    def test_too_many_edges(self) -> None:
        """More edges than node pairs should be rejected."""
        with pytest.raises(ValueError, match="do not fit"):
            er_generate(5, 11, derive_rng(0))

    def test_negative_sizes(self) -> None:
        """Negative sizes should be rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            er_generate(-1, 0, derive_rng(0))


class TestBarabasiAlbert:
    def test_edge_count(self) -> None:
        """Barabasi-Albert should attach k edges per added node and leave none isolated."""
        g = ba_generate(50, 3, derive_rng(2))
        assert g.n == 50
        assert g.m == (50 - 3) * 3
        assert g.isolated_nodes() == []

    def test_heavy_tail(self) -> None:
        """Preferential attachment should produce hubs well above the median degree."""
        g = ba_generate(500, 2, derive_rng(3))
        deg = g.degrees()
        assert deg.max() > 5 * np.median(deg)

    @pytest.mark.parametrize(("n", "k"), [(5, 0), (5, 5), (3, 7)])
    def test_attach_range(self, n: int, k: int) -> None:
        """attach_k must lie in [1, n)."""
        with pytest.raises(ValueError, match="attach_k"):
            ba_generate(n, k, derive_rng(0))


class TestPlantedPartition:
    def test_blocks_and_density(self) -> None:
        """Most planted-partition edges should fall inside a block."""
        sizes = [40, 20]
        g = planted_partition(sizes, 0.5, 0.01, derive_rng(6))
        blocks = block_of(sizes)
        assert g.n == 60
        edges = g.edge_array()
        within = int((blocks[edges[:, 0]] == blocks[edges[:, 1]]).sum())
        assert within > 0.8 * g.m

    def test_block_of(self) -> None:
        """block_of should map each node to its block index."""
        np.testing.assert_array_equal(block_of([2, 3]), [0, 0, 1, 1, 1])


class TestConversion:
    def test_networkx_both_ways(self) -> None:
        """Conversion through networkx should keep every edge."""
        g = build_bridge_graph(4)
        nxg = to_networkx(g)
        assert nxg.number_of_edges() == g.m
        assert from_networkx(nxg).edges == g.edges
