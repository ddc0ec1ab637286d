"""Tests for edge-list, label and protected-group files."""

from pathlib import Path

import numpy as np
import pytest

from fairgen.graph.core import IsolatedNodeError
from fairgen.graph.io import (
    EdgeListError,
    load_edge_list,
    load_labels,
    load_protected,
    write_edge_list,
    write_labels,
    write_protected,
)
from fairgen.model import GroupMembership, LabelSet

pytestmark = pytest.mark.unit


def _write(tmp_path: Path, name: str, text: str) -> Path:
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadEdgeList:
    def test_ids_by_first_appearance(self, tmp_path: Path) -> None:
        """Internal ids should follow first appearance in the file."""
        p = _write(tmp_path, "g.edges", "b a\na c\n")
        g = load_edge_list(p)
        assert g.node_ids == ("b", "a", "c")
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_comments_blank_lines_duplicates(self, tmp_path: Path) -> None:
        """Comments, blank lines and duplicate edges should be skipped."""
        p = _write(tmp_path, "g.edges", "# header\n\n1 2\n2 1\n1 2\n2 3\n")
        g = load_edge_list(p)
        assert g.n == 3
        assert g.m == 2

    def test_malformed_line_reports_line_number(self, tmp_path: Path) -> None:
        """A line without exactly two tokens should be reported with its line number."""
        p = _write(tmp_path, "g.edges", "1 2\n1 2 3\n")
        with pytest.raises(EdgeListError) as exc:
            load_edge_list(p)
        assert exc.value.line_no == 2
        assert ":2:" in str(exc.value)

    def test_empty_file_rejected(self, tmp_path: Path) -> None:
        """A file with no edges should be rejected."""
        p = _write(tmp_path, "g.edges", "# nothing\n")
        with pytest.raises(EdgeListError, match="empty"):
            load_edge_list(p)

    def test_self_loop_only_node_is_isolated(self, tmp_path: Path) -> None:
        """A node seen only in a self-loop is isolated and needs allow_isolated."""
        p = _write(tmp_path, "g.edges", "1 2\n3 3\n")
        with pytest.raises(IsolatedNodeError):
            load_edge_list(p)
        g = load_edge_list(p, allow_isolated=True)
        assert g.isolated_nodes() == [2]

    def test_universe_shares_ids(self, tmp_path: Path) -> None:
        """A graph read against a universe should reuse its node ids."""
        base = load_edge_list(_write(tmp_path, "a.edges", "x y\ny z\n"))
        other = load_edge_list(_write(tmp_path, "b.edges", "z x\n"), universe=base)
        assert other.n == base.n
        assert other.edges == frozenset({(0, 2)})

    def test_universe_unknown_token(self, tmp_path: Path) -> None:
        """A token missing from the universe should be rejected."""
        base = load_edge_list(_write(tmp_path, "a.edges", "x y\n"))
        with pytest.raises(EdgeListError, match="unknown node 'q'"):
            load_edge_list(_write(tmp_path, "b.edges", "x q\n"), universe=base)


class TestLabelsAndGroups:
    def test_load_labels(self, tmp_path: Path) -> None:
        """Labels should map to internal ids and infer the class count."""
        g = load_edge_list(_write(tmp_path, "g.edges", "a b\nb c\n"))
        labels = load_labels(_write(tmp_path, "l.tsv", "a\t0\nc\t2\n"), g)
        assert labels.entries == {0: 0, 2: 2}
        assert labels.num_classes == 3

    def test_label_unknown_node(self, tmp_path: Path) -> None:
        """A label for an unknown node should be reported with its line."""
        g = load_edge_list(_write(tmp_path, "g.edges", "a b\n"))
        with pytest.raises(EdgeListError) as exc:
            load_labels(_write(tmp_path, "l.tsv", "a\t0\nz\t1\n"), g)
        assert exc.value.line_no == 2

    def test_label_class_must_be_integer(self, tmp_path: Path) -> None:
        """A non-integer class should be rejected."""
        g = load_edge_list(_write(tmp_path, "g.edges", "a b\n"))
        with pytest.raises(EdgeListError, match="integer"):
            load_labels(_write(tmp_path, "l.tsv", "a\tred\n"), g)

    def test_load_protected(self, tmp_path: Path) -> None:
        """The protected file should split nodes into the two groups."""
        g = load_edge_list(_write(tmp_path, "g.edges", "a b\nb c\n"))
        groups = load_protected(_write(tmp_path, "p.txt", "c\na\n"), g)
        assert groups.protected == frozenset({0, 2})
        assert groups.unprotected == frozenset({1})

    def test_write_then_read_uses_external_ids(self, tmp_path: Path) -> None:
        """Written graph, label and group files should read back under the same ids."""
        g = load_edge_list(_write(tmp_path, "g.edges", "n7 n3\nn3 n9\n"))
        out = write_edge_list(g, tmp_path / "out" / "copy.edges")
        again = load_edge_list(out)
        assert again.node_ids == g.node_ids
        assert again.n == g.n
        assert np.array_equal(again.indptr, g.indptr)
        assert np.array_equal(again.indices, g.indices)

        labels = LabelSet(entries={1: 1}, num_classes=2)
        lab_again = load_labels(write_labels(labels, g, tmp_path / "l.tsv"), g, num_classes=2)
        assert lab_again.entries == {1: 1}

        groups = GroupMembership(n=g.n, protected=frozenset({2}))
        assert load_protected(write_protected(groups, g, tmp_path / "p.txt"), g) == groups
