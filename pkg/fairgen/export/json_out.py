"""JSON export for metric reports and lemma audits."""

from __future__ import annotations

import json
import math
from pathlib import Path

from fairgen.model import MetricReport
from fairgen.sampler.diffusion import LemmaReport


def _num(value: float | None) -> float | None:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return value


def report_to_dict(report: MetricReport) -> dict:
    """Convert a MetricReport to a JSON-serializable dict; NaN becomes ``null``."""
    rows = []
    for r in report.rows:
        rows.append(
            {
                "name": r.name,
                "original": _num(r.original),
                "generated": _num(r.generated),
                "R": _num(r.overall),
                "R_protected": _num(r.protected),
                "flags": list(r.flags),
            }
        )
    return {
        "schema_version": "fairgen.metrics.v1",
        "metrics": rows,
        "metadata": report.metadata,
    }


def lemma_to_dict(report: LemmaReport) -> dict:
    checks = []
    for c in report.checks:
        checks.append(
            {
                "node": c.node,
                "status": c.status,
                "max_escape": c.max_escape,
                "min_slack": c.min_slack,
                "worst_step": c.worst_step,
            }
        )
    return {
        "schema_version": "fairgen.lemma.v1",
        "phi": report.phi,
        "delta": report.delta,
        "t_max": report.t_max,
        "core": report.core,
        "passed": report.passed,
        "violations": len(report.violations),
        "checks": checks,
    }


def dump_json(data: dict, path: str | Path | None = None, pretty: bool = True) -> str:
    """Serialize *data* with sorted keys; write it when *path* is given."""
    text = json.dumps(data, indent=2 if pretty else None, sort_keys=True, default=str) + "\n"
    if path is not None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    return text


def export_json(report: MetricReport, path: str | Path | None = None, pretty: bool = True) -> str:
    """Export a metric report to JSON. If path given, write to file. Always returns the string."""
    return dump_json(report_to_dict(report), path, pretty)
