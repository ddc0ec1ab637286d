"""Relative discrepancies between an original and a generated graph."""

from __future__ import annotations

import logging
import math

from fairgen.graph.core import ego_subgraph
from fairgen.metrics.stats import Metric, MetricUndefinedError, aspl_details, metric
from fairgen.model import Graph, GroupMembership, MetricReport, MetricRow

log = logging.getLogger(__name__)


def relative_difference(f_m: Metric | str, original: float, generated: float) -> float:
    if original == 0:
        raise MetricUndefinedError(f_m, "original value is zero")
    return abs((original - generated) / original)


def overall_discrepancy(g: Graph, g_gen: Graph, f_m: Metric | str) -> float:
    """``|f(G) - f(G~)| / |f(G)|``."""
    return relative_difference(f_m, metric(f_m, g), metric(f_m, g_gen))


def protected_egos(g: Graph, g_gen: Graph, groups: GroupMembership) -> tuple[Graph, Graph]:
    """1-hop ego networks around the protected nodes in both graphs."""
    if not groups.protected:
        raise MetricUndefinedError("protected", "protected group is empty")
    if g.n != g_gen.n or groups.n != g.n:
        raise ValueError(
            f"graphs and groups must share one node universe ({g.n}, {g_gen.n}, {groups.n})"
        )
    anchors = sorted(groups.protected)
    return ego_subgraph(g, anchors), ego_subgraph(g_gen, anchors)


def protected_discrepancy(
    g: Graph, g_gen: Graph, groups: GroupMembership, f_m: Metric | str
) -> float:
    """The relative difference evaluated on the protected ego networks."""
    ego, ego_gen = protected_egos(g, g_gen, groups)
    return overall_discrepancy(ego, ego_gen, f_m)


def _safe(fn, flags: list[str], tag: str) -> float:
    try:
        return float(fn())
    except MetricUndefinedError as e:
        flags.append(f"{tag}: {e.reason}")
        return math.nan


def metric_report(
    g: Graph,
    g_gen: Graph,
    groups: GroupMembership,
    metrics: list[Metric] | None = None,
    metadata: dict | None = None,
) -> MetricReport:
    """One row per statistic; undefined entries are NaN with a flag naming why."""
    ego, ego_gen = protected_egos(g, g_gen, groups)
    rows: list[MetricRow] = []
    for m in metrics or list(Metric):
        flags: list[str] = []
        original = _safe(lambda: metric(m, g), flags, "original")
        generated = _safe(lambda: metric(m, g_gen), flags, "generated")
        overall = (
            _safe(lambda: relative_difference(m, original, generated), flags, "R")
            if not (math.isnan(original) or math.isnan(generated))
            else math.nan
        )
        protected = _safe(
            lambda: overall_discrepancy(ego, ego_gen, m), flags, "R+"
        )
        rows.append(
            MetricRow(
                name=m.value,
                original=original,
                generated=generated,
                overall=overall,
                protected=protected,
                flags=flags,
            )
        )
    meta = {
        "nodes": g.n,
        "edges_original": g.m,
        "edges_generated": g_gen.m,
        "protected_nodes": len(groups.protected),
        "ego_nodes_original": ego.n,
        "ego_nodes_generated": ego_gen.n,
    }
    for label, graph in (("original", g), ("generated", g_gen)):
        try:
            meta[f"aspl_unreachable_{label}"] = aspl_details(graph)[1]
        except MetricUndefinedError:
            meta[f"aspl_unreachable_{label}"] = None
    meta.update(metadata or {})
    return MetricReport(rows=rows, metadata=meta)
