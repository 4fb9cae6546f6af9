"""CSV ingestion into a Dataset."""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import CsvIngestError
from .pipeline import Dataset


def ingest_csv(path, response: str | None = None,
               categorical_response: bool = False,
               feature_kernels: dict | None = None) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    The last column is the response unless ``response`` names another one.
    Feature cells must parse as finite floats; the response too unless
    ``categorical_response`` is set, in which case labels are kept verbatim.
    Unparseable rows are collected and reported with their row numbers.
    ``feature_kernels`` optionally maps column names to "gaussian"/"delta".
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvIngestError(f"{path}: empty file, header row required") from None
        rows = list(reader)

    if response is None:
        response_idx = len(header) - 1
    else:
        try:
            response_idx = header.index(response)
        except ValueError:
            raise CsvIngestError(
                f"{path}: response column {response!r} not in header {header}"
            ) from None
    feature_cols = [i for i in range(len(header)) if i != response_idx]
    feature_names = tuple(header[i] for i in feature_cols)

    x_rows = []
    y_vals = []
    problems = []
    for r, row in enumerate(rows, start=2):  # 1-based with header on line 1
        if len(row) != len(header):
            problems.append(f"row {r}: expected {len(header)} cells, got {len(row)}")
            continue
        try:
            x_rows.append([_parse_float(row[i], r, header[i]) for i in feature_cols])
            raw = row[response_idx]
            if categorical_response:
                if raw == "":
                    raise CsvIngestError(
                        f"row {r}, column '{header[response_idx]}': empty label")
                y_vals.append(raw)
            else:
                y_vals.append(_parse_float(raw, r, header[response_idx]))
        except CsvIngestError as exc:
            problems.append(str(exc))

    if problems:
        shown = "; ".join(problems[:10])
        more = "" if len(problems) <= 10 else f" (+{len(problems) - 10} more)"
        raise CsvIngestError(f"{path}: {shown}{more}")
    if not x_rows:
        raise CsvIngestError(f"{path}: no data rows")

    kernels = None
    if feature_kernels:
        unknown = set(feature_kernels) - set(feature_names)
        if unknown:
            raise CsvIngestError(f"{path}: kernel override for unknown columns {sorted(unknown)}")
        kernels = tuple(feature_kernels.get(name, "gaussian") for name in feature_names)

    y = np.array(y_vals) if categorical_response else np.array(y_vals, dtype=float)
    return Dataset(x=np.array(x_rows, dtype=float), y=y,
                   y_categorical=categorical_response,
                   feature_names=feature_names,
                   feature_kernels=kernels)


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise CsvIngestError(
            f"row {row}, column '{column}': cannot parse {cell!r}") from None
    if math.isnan(value) or math.isinf(value):
        raise CsvIngestError(f"row {row}, column '{column}': non-finite value")
    return value
