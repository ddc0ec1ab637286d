"""CSV tables: metric reports, objective traces and benchmark timings."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

from fairgen.model import MetricReport

METRIC_COLUMNS = ("name", "original", "generated", "R", "R_protected", "flags")


def _cell(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def metric_csv(report: MetricReport) -> str:
    return rows_to_csv(
        METRIC_COLUMNS,
        (
            (r.name, r.original, r.generated, r.overall, r.protected, "; ".join(r.flags))
            for r in report.rows
        ),
    )


def dict_rows_csv(rows: list[dict]) -> str:
    """CSV for a list of same-keyed dicts; column order follows the first row."""
    if not rows:
        return ""
    header = list(rows[0])
    return rows_to_csv(header, ([row[k] for k in header] for row in rows))


def write_text(text: str, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return p
