"""Plain-text reports for terminal display."""

from __future__ import annotations

import math

from fairgen.model import CycleRecord, MetricReport, Warning
from fairgen.sampler.diffusion import LemmaReport


def format_value(value: float | None, width: int = 10) -> str:
    """Fixed-width number; undefined values print as ``n/a``."""
    if value is None or math.isnan(value):
        return f"{'n/a':>{width}}"
    if float(value).is_integer() and abs(value) < 1e12:
        return f"{int(value):>{width}d}"
    return f"{value:>{width}.4f}"


def _section(lines: list[str], title: str, major: bool = False) -> None:
    rule = "=" * 60 if major else "-" * 60
    lines.append(rule)
    lines.append(title)
    lines.append(rule)


def text_report(report: MetricReport, warnings: list[Warning] | None = None) -> str:
    """Summary of a metric comparison."""
    lines: list[str] = []
    meta = report.metadata

    _section(lines, "Graph Comparison", major=True)
    lines.append(f"  Nodes:            {meta.get('nodes', '?')}")
    lines.append(
        f"  Edges:            {meta.get('edges_original', '?')} original, "
        f"{meta.get('edges_generated', '?')} generated"
    )
    lines.append(f"  Protected nodes:  {meta.get('protected_nodes', '?')}")
    lines.append("")

    _section(lines, "Statistics")
    lines.append(f"  {'Metric':<6} {'Original':>10} {'Generated':>10} {'R':>10} {'R+':>10}")
    lines.append(f"  {'------':<6} {'--------':>10} {'---------':>10} {'-':>10} {'--':>10}")
    for r in report.rows:
        lines.append(
            f"  {r.name:<6} {format_value(r.original)} {format_value(r.generated)} "
            f"{format_value(r.overall)} {format_value(r.protected)}"
        )
    lines.append("")

    flagged = [r for r in report.rows if r.flags]
    if flagged:
        _section(lines, "Undefined Values")
        for r in flagged:
            for flag in r.flags:
                lines.append(f"  {r.name}: {flag}")
        lines.append("")

    if warnings:
        _section(lines, "Warnings")
        for w in warnings:
            lines.append(f"  [{w.code}] {w.message}")
        lines.append("")

    return "\n".join(lines)


def lemma_text(report: LemmaReport) -> str:
    lines: list[str] = []
    _section(lines, "Escape Bound Check", major=True)
    lines.append(f"  Conductance:  {report.phi:.6f}")
    lines.append(f"  delta:        {report.delta}")
    lines.append(f"  Steps:        {report.t_max}")
    lines.append(f"  Core size:    {len(report.core)}")
    lines.append(f"  Violations:   {len(report.violations)}")
    lines.append(f"  Result:       {'PASS' if report.passed else 'FAIL'}")
    lines.append("")
    if report.violations:
        _section(lines, "Violations")
        for c in report.violations:
            lines.append(f"  node {c.node}: slack {c.min_slack:.3e} at step {c.worst_step}")
        lines.append("")
    return "\n".join(lines)


def training_text(cycles: list[CycleRecord]) -> str:
    lines: list[str] = []
    _section(lines, "Training Cycles", major=True)
    lines.append(f"  {'Cycle':>5} {'lambda':>8} {'Selected':>8} {'Pseudo':>6} {'Pool+':>6} {'J':>12}")
    for c in cycles:
        lines.append(
            f"  {c.cycle:>5} {c.lam:>8.4f} {c.selected:>8} {c.pseudo_labelled:>6} "
            f"{c.positive_pool:>6} {c.objective.get('J', math.nan):>12.4f}"
        )
    lines.append("")
    return "\n".join(lines)
