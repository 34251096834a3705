"""Evaluation report container and JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .sweep import BD_RATE_AVERAGE

SCHEMA_ID = "vvc_mcm.eval_report/1"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "vvc_mcm evaluation report",
    "type": "object",
    "required": ["schema", "seed", "config", "error_stats", "divergence", "cost_sweep",
                 "parallel_sweep", "throughput", "reference"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "seed": {"type": ["integer", "null"]},
        "config": {"type": "object"},
        "error_stats": {"type": "array", "items": {
            "type": "object",
            "required": ["filter", "n", "max_abs_error", "mean_abs_error", "psnr_db", "psnr_infinite"],
            "properties": {
                "psnr_db": {"type": ["number", "null"]},
                "psnr_infinite": {"type": "boolean"},
            },
        }},
        "divergence": {"type": "array", "items": {
            "type": "object",
            "required": ["filter", "n", "blocks", "rate"],
            "properties": {"rate": {"type": "number", "minimum": 0, "maximum": 1}},
        }},
        "cost_sweep": {"type": "array", "items": {
            "type": "object",
            "required": ["implementation", "adders", "gate_estimate", "bd_rate_avg_pct"],
        }},
        "parallel_sweep": {"type": "array", "items": {
            "type": "object", "required": ["implementation", "lanes", "adders"],
        }},
        "throughput": {"type": ["object", "null"]},
        "reference": {"type": "object"},
    },
}


def _reference():
    return {"bd_rate_average_pct": dict(BD_RATE_AVERAGE),
            "note": "published averages, copied as metadata; not measured by this tool"}


@dataclass
class EvalReport:
    seed: int | None = None
    config: dict = field(default_factory=dict)
    error_stats: list = field(default_factory=list)
    divergence: list = field(default_factory=list)
    cost_sweep: list = field(default_factory=list)
    parallel_sweep: list = field(default_factory=list)
    throughput: dict | None = None
    reference: dict = field(default_factory=_reference)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_ID, **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        data = dict(data)
        if data.pop("schema", SCHEMA_ID) != SCHEMA_ID:
            raise ValueError("unsupported report schema")
        return cls(**data)

    def metric_rows(self):
        """(config, metric, value) triples in a stable order."""
        rows = []
        for r in self.error_stats:
            key = f"error/{r['filter']}/n={r['n']}"
            for m in ("max_abs_error", "mean_abs_error", "psnr_db", "psnr_infinite", "changed_predictions"):
                if m in r:
                    rows.append((key, m, r[m]))
        for r in self.divergence:
            key = f"divergence/{r['filter']}/n={r['n']}"
            for m in ("blocks", "diverged", "rate"):
                if m in r:
                    rows.append((key, m, r[m]))
        for r in self.cost_sweep:
            key = f"cost/{r['implementation']}"
            for m in ("adders", "multipliers", "depth", "gate_estimate",
                      "distinct_coefficients", "bd_rate_avg_pct"):
                if m in r:
                    rows.append((key, m, r[m]))
        for r in self.parallel_sweep:
            key = f"parallel/{r['implementation']}/lanes={r['lanes']}"
            for m in ("adders", "adders_per_lane", "gate_estimate", "gate_estimate_per_lane"):
                if m in r:
                    rows.append((key, m, r[m]))
        if self.throughput:
            for m, v in self.throughput.items():
                rows.append(("throughput", m, v))
        return rows


def report_text(report: EvalReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["config", "metric", "value"])
        for key, metric, value in report.metric_rows():
            w.writerow([key, metric, "" if value is None else value])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def report_write(report: EvalReport, path, fmt: str = "json") -> Path:
    text = report_text(report, fmt)
    path = Path(path)
    path.write_text(text)
    return path


def report_read(path) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text()))
