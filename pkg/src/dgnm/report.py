"""Experiment reports and their on-disk forms.

``report.json``
    the full tree, schema tag ``dgnm-report/1``::

        schema, experiment, config{...}, environment{...},
        runs[{index, n, field, Lambda, seed, ..., status, stage, error, passed, checks}],
        fits[{n, field, model, C_hat, intercept, residual, points}],
        checks[{name, passed, detail}],
        series{name: [[x, y], ...]}
``runs.csv``
    one row per run, columns in first-seen order, floats written with ``repr``
``<series>.dat``
    two whitespace-separated columns per series, for gnuplot

Non-finite floats are stored as ``null`` so the JSON stays standard and the
round trip is exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "dgnm-report/1"


def clean(obj):
    """Plain JSON-compatible copy: numpy scalars unwrapped, NaN/inf mapped to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


@dataclass
class ExperimentReport:
    schema: str
    experiment: str
    config: dict
    environment: dict
    runs: list[dict]
    fits: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)
    series: dict[str, list] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failed_checks(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]

    def to_dict(self) -> dict:
        return clean(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)


def csv_text(runs: list[dict]) -> str:
    columns: list[str] = []
    for row in runs:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in runs:
        writer.writerow(["" if row.get(c) is None else repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in columns])
    return buf.getvalue()


def dat_text(points) -> str:
    return "".join(f"{x!r} {'nan' if y is None else repr(y)}\n" for x, y in points)


def write_report(report: ExperimentReport, out_dir) -> dict[str, Path]:
    """Write JSON, CSV and .dat files under ``out_dir``; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "report.json", "csv": out / "runs.csv"}
    paths["json"].write_text(json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n")
    paths["csv"].write_text(csv_text(report.runs))
    for name, pts in report.series.items():
        p = out / f"{name}.dat"
        p.write_text(dat_text(pts))
        paths[f"dat:{name}"] = p
    return paths


def read_report(path) -> ExperimentReport:
    """Read ``report.json`` (or a directory containing it)."""
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    return ExperimentReport.from_dict(json.loads(p.read_text()))


def read_csv_rows(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
