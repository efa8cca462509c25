"""
Report rendering and run manifests
"""

from packages.reporting.tables import (
    ReportTable,
    diagnostics_table,
    estimate_table,
    impact_table,
    render,
    render_delimited,
    render_text,
    report_suffix,
    selection_table,
    to_frame,
    write_report,
)
from packages.reporting.manifest import build_manifest, package_version, write_manifest

__all__ = [
    "ReportTable",
    "diagnostics_table",
    "estimate_table",
    "impact_table",
    "render",
    "render_delimited",
    "render_text",
    "report_suffix",
    "selection_table",
    "to_frame",
    "write_report",
    "build_manifest",
    "package_version",
    "write_manifest",
]
