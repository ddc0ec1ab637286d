"""Output formatters (JSON, CSV, text reports, run manifests)."""

from fairgen.export.csv_out import dict_rows_csv as dict_rows_csv
from fairgen.export.csv_out import metric_csv as metric_csv
from fairgen.export.json_out import export_json as export_json
from fairgen.export.json_out import report_to_dict as report_to_dict
from fairgen.export.manifest import build_manifest as build_manifest
from fairgen.export.manifest import write_manifest as write_manifest
from fairgen.export.text_report import lemma_text as lemma_text
from fairgen.export.text_report import text_report as text_report
