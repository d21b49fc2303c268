"""Verification reports and their JSON / CSV rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

FIELDS = ("name", "route_a", "route_b", "value_a", "value_b", "residual",
          "tolerance", "pass", "runtime_ms", "config")


def fmt_complex(z) -> str:
    z = complex(z)
    return f"{z.real:.15g}{z.imag:+.15g}j"


def fmt_residual(r: float) -> str:
    return f"{r:.6g}"


@dataclass
class VerifyReport:
    name: str
    route_a: str
    route_b: str
    value_a: complex
    value_b: complex
    residual: float
    tolerance: float
    runtime_ms: int = 0
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_record(self) -> dict:
        return {
            "name": self.name,
            "route_a": self.route_a,
            "route_b": self.route_b,
            "value_a": fmt_complex(self.value_a),
            "value_b": fmt_complex(self.value_b),
            "residual": fmt_residual(self.residual),
            "tolerance": f"{self.tolerance:.6g}",
            "pass": self.passed,
            "runtime_ms": int(self.runtime_ms),
            "config": {k: self.config[k] for k in sorted(self.config)},
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VerifyReport":
        return cls(rec["name"], rec["route_a"], rec["route_b"],
                   complex(rec["value_a"]), complex(rec["value_b"]),
                   float(rec["residual"]), float(rec["tolerance"]),
                   int(rec["runtime_ms"]), dict(rec.get("config", {})))


def emit(reports, fmt: str = "json") -> str:
    """Render one report or a list of them."""
    if isinstance(reports, VerifyReport):
        reports = [reports]
    records = [r.as_record() for r in reports]
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for rec in records:
            row = [str(v).lower() if isinstance(v, bool) else v for v in (rec[k] for k in FIELDS[:-1])]
            row.append(json.dumps(rec["config"], sort_keys=True))
            w.writerow(row)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")
