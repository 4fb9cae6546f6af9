"""Serialisation of run and experiment reports to JSON and flat CSV."""

from __future__ import annotations

import csv
import dataclasses
import io
import json

from .pipeline import FeatureOutcome, RunReport

JSON = "json"
CSV = "csv"

_CSV_FIELDS = ("feature", "target", "p_value", "ci_lo", "ci_hi",
               "selected", "significant")


def report_to_dict(report) -> dict:
    return dataclasses.asdict(report)


def run_report_from_dict(payload: dict) -> RunReport:
    payload = dict(payload)
    payload["results"] = [FeatureOutcome(**r) for r in payload["results"]]
    return RunReport(**payload)


def to_json(report) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def run_report_to_csv(report: RunReport) -> str:
    """One row per selected feature; non-testable features keep empty cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for res in report.results:
        writer.writerow([
            res.feature,
            res.target,
            "" if res.p_value is None else repr(res.p_value),
            "" if res.ci_lower is None else repr(res.ci_lower),
            "" if res.ci_upper is None else repr(res.ci_upper),
            "true",
            "true" if res.significant else "false",
        ])
    return buf.getvalue()


def emit_report(report, path, fmt: str = JSON) -> None:
    """Write a run or experiment report to disk with stable key order."""
    if fmt == JSON:
        text = to_json(report)
    elif fmt == CSV:
        if not isinstance(report, RunReport):
            raise ValueError("CSV output is defined for run reports only")
        text = run_report_to_csv(report)
    else:
        raise ValueError(f"unknown report format: {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
