"""Tests for escape probabilities, diffusion cores and the escape-bound audit."""

import numpy as np
import pytest

from fairgen.graph.core import conductance
from fairgen.model import Graph
from fairgen.sampler.diffusion import (
    diffusion_core,
    escape_probability,
    escape_trace,
    outside_probability,
    set_conductance,
    verify_lemma_bound,
)
from fairgen.sampler.walks import biased_walk
from fairgen.util.rng import derive_rng
from tests.builders import (
    build_bridge_graph,
    build_clique,
    build_planted_partition,
    build_sampler_config,
)

pytestmark = pytest.mark.unit


def _dense_lazy(g: Graph) -> np.ndarray:
    a = g.adjacency_matrix().toarray()
    return (a / a.sum(axis=0, keepdims=True) + np.eye(g.n)) / 2.0


def _dense_escape(g: Graph, s: list[int], x: int, t: int) -> float:
    m = _dense_lazy(g)
    p = m[np.ix_(s, s)]
    vec = np.zeros(len(s))
    vec[s.index(x)] = 1.0
    for _ in range(t):
        vec = p @ vec
    return 1.0 - vec.sum()


def _dense_outside(g: Graph, s: list[int], x: int, t: int) -> float:
    m = _dense_lazy(g)
    vec = np.zeros(g.n)
    vec[x] = 1.0
    for _ in range(t):
        vec = m @ vec
    return 1.0 - vec[s].sum()


class TestEscapeProbability:
    def test_matches_dense_computation(self) -> None:
        """Escape probability should match a dense lazy-walk computation for every node and step."""
        g = build_bridge_graph(4)
        s = [0, 1, 2, 3]
        for x in s:
            for t in range(6):
                assert escape_probability(g, s, x, t) == pytest.approx(
                    _dense_escape(g, s, x, t), abs=1e-12
                )

    def test_one_step_from_bridge_endpoint(self) -> None:
        """One lazy step from the bridge endpoint should escape with probability 1/8."""
        # node 3 has degree 4 with one outside neighbor; the lazy walk halves it
        g = build_bridge_graph(4)
        assert escape_probability(g, [0, 1, 2, 3], 3, 1) == pytest.approx(1 / 8)

    def test_non_decreasing_in_t(self) -> None:
        """Escape probability should never fall as t grows."""
        g, blocks = build_planted_partition((20, 20), 0.4, 0.05, seed=3)
        s = [int(u) for u in np.flatnonzero(blocks == 0)]
        _, trace = escape_trace(g, s, 12)
        assert (np.diff(trace, axis=0) >= -1e-12).all()

    def test_zero_for_full_component(self) -> None:
        """A whole connected component should have nothing to escape to."""
        g = Graph.from_edges(6, build_clique(3) + build_clique(3, offset=3))
        for t in (1, 5, 20):
            assert escape_probability(g, [0, 1, 2], 0, t) == 0.0
            assert outside_probability(g, [0, 1, 2], 0, t) == pytest.approx(0.0, abs=1e-12)

    def test_outside_matches_dense_computation(self) -> None:
        """The unrestricted outside mass should match a dense computation."""
        g = build_bridge_graph(4)
        s = [0, 1, 2, 3]
        assert outside_probability(g, s, 0, 7) == pytest.approx(
            _dense_outside(g, s, 0, 7), abs=1e-12
        )

    def test_node_outside_set_rejected(self) -> None:
        """The start node must belong to the set."""
        g = build_bridge_graph(4)
        with pytest.raises(ValueError, match="not in the set"):
            escape_probability(g, [0, 1], 5, 2)

    def test_monte_carlo_agrees(self) -> None:
        """Simulated lazy walks should escape at the computed rate within sampling error."""
        # Lazy walks simulated by staying put with probability 1/2.
        g = build_bridge_graph(4)
        s = {0, 1, 2, 3}
        rng = derive_rng(0, "mc")
        trials, t, escaped = 20000, 4, 0
        for _ in range(trials):
            node = 3
            for _ in range(t):
                if rng.random() < 0.5:
                    nbrs = g.neighbors(node)
                    node = int(nbrs[rng.integers(len(nbrs))])
                if node not in s:
                    escaped += 1
                    break
        exact = escape_probability(g, sorted(s), 3, t)
        assert abs(escaped / trials - exact) < 0.02


class TestDiffusionCore:
    def test_component_is_its_own_core(self) -> None:
        """A zero-conductance component should be its own core."""
        g = Graph.from_edges(6, build_clique(3) + build_clique(3, offset=3))
        assert set_conductance(g, [0, 1, 2]) == 0.0
        assert diffusion_core(g, [0, 1, 2], 0.5, 4) == {0, 1, 2}

    def test_tiny_delta_empties_core(self) -> None:
        """A near-zero delta should leave no node in the core."""
        g = build_bridge_graph(4)
        assert diffusion_core(g, [0, 1, 2, 3], 1e-9, 3) == set()

    def test_matches_dense_oracle_on_planted_partition(self) -> None:
        """The core should match a dense recomputation on a planted partition."""
        g, blocks = build_planted_partition((50, 50), 0.3, 0.01, seed=1)
        s = [int(u) for u in np.flatnonzero(blocks == 0)]
        delta, t = 0.5, 3
        phi = conductance(g, s)
        expected = {x for x in s if _dense_outside(g, s, x, t) < delta * phi}
        assert diffusion_core(g, s, delta, t) == expected

    def test_delta_range_checked(self) -> None:
        """delta must lie in (0, 1)."""
        with pytest.raises(ValueError, match="delta"):
            diffusion_core(build_bridge_graph(4), [0, 1], 1.0, 2)


class TestLemmaAudit:
    def test_full_component_passes(self) -> None:
        """A whole component should pass the audit with every node in the core."""
        g = Graph.from_edges(6, build_clique(3) + build_clique(3, offset=3))
        report = verify_lemma_bound(g, [0, 1, 2], 0.5, 5)
        assert report.phi == 0.0
        assert report.core == [0, 1, 2]
        assert report.passed

    def test_non_core_members_out_of_scope(self) -> None:
        """Set members outside the core should be reported out of scope."""
        g = build_bridge_graph(4)
        s = [0, 1, 2, 3]
        report = verify_lemma_bound(g, s, 0.5, 3)
        core = set(report.core)
        for check in report.checks:
            expected = "out-of-scope" if check.node not in core else check.status
            assert check.status == expected
        assert {c.node for c in report.checks} == set(s)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("delta", [0.3, 0.5])
    def test_violations_match_dense_recomputation(self, seed: int, delta: float) -> None:
        """Audit slack and status should match a dense recomputation per core node."""
        g, blocks = build_planted_partition((30, 30), 0.3, 0.03, seed=seed)
        s = [int(u) for u in np.flatnonzero(blocks == 0)]
        t_max = 6
        report = verify_lemma_bound(g, s, delta, t_max)
        phi = report.phi
        for check in report.checks:
            if check.status == "out-of-scope":
                continue
            worst = min(
                step * delta * phi - _dense_escape(g, s, check.node, step)
                for step in range(1, t_max + 1)
            )
            assert check.min_slack == pytest.approx(worst, abs=1e-9)
            assert (check.status == "violation") == (worst < -1e-9)

    @pytest.mark.parametrize("delta", [0.3, 0.5])
    def test_no_violations_on_planted_partitions(self, delta: float) -> None:
        """Every core node of 20 planted-partition graphs stays within T * delta * phi."""
        violations = []
        for seed in range(20):
            g, blocks = build_planted_partition((50, 50), 0.3, 0.01, seed=seed)
            s = [int(u) for u in np.flatnonzero(blocks == 0)]
            for t_max in (3, 10):
                report = verify_lemma_bound(g, s, delta, t_max)
                violations += [(seed, t_max, c.node) for c in report.violations]
        assert violations == []


class TestWalksStayInside:
    def test_walks_from_isolated_block_never_leave(self) -> None:
        """Walks started in a disconnected block should stay in it."""
        g = Graph.from_edges(6, build_clique(3) + build_clique(3, offset=3))
        cfg = build_sampler_config(walk_length=10)
        for i in range(20):
            walk = biased_walk(g, 0, cfg, derive_rng(0, i))
            assert set(walk.nodes) <= {0, 1, 2}
