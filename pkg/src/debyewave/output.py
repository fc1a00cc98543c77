"""Diagnostics CSV, run manifests and two-column plot data."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .grid import ScalarField
from .simulation import DiagnosticsRow

__all__ = [
    "RunManifest",
    "diagnostics_to_csv",
    "diagnostics_from_csv",
    "write_diagnostics",
    "read_diagnostics",
    "snapshot_plot_data",
    "diagnostics_plot_data",
    "read_plot_data",
]


def _num(x: float) -> str:
    return format(float(x), ".17g")


def diagnostics_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DiagnosticsRow.FIELDS)
    for r in rows:
        w.writerow([_num(getattr(r, k)) for k in DiagnosticsRow.FIELDS[:-1]]
                   + [int(bool(r.wrapped))])
    return buf.getvalue()


def diagnostics_from_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != DiagnosticsRow.FIELDS:
        raise ValueError(f"unexpected diagnostics header {header}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        *nums, wrapped = rec
        rows.append(DiagnosticsRow(*(float(x) for x in nums), wrapped=bool(int(wrapped))))
    return rows


def write_diagnostics(path, rows: list) -> None:
    Path(path).write_text(diagnostics_to_csv(rows), encoding="utf-8")


def read_diagnostics(path) -> list:
    return diagnostics_from_csv(Path(path).read_text(encoding="utf-8"))


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    started: str
    finished: str = ""
    seed: int = 0
    outputs: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def snapshot_plot_data(f: ScalarField, column: str = "value") -> str:
    """``x,value`` rows in 1D and ``x,y,value`` rows in 2D (row-major order)."""
    g = f.grid
    axes = ["x", "y"][: g.dim]
    lines = [",".join(axes + [column])]
    coords = [c.ravel() for c in g.coords]
    for i, v in enumerate(f.samples.ravel()):
        lines.append(",".join([_num(c[i]) for c in coords] + [_num(v)]))
    return "\n".join(lines) + "\n"


def diagnostics_plot_data(rows: list, column: str) -> str:
    """``t,<column>`` rows from a diagnostics table."""
    if column not in DiagnosticsRow.FIELDS or column == "t":
        raise ValueError(f"unknown diagnostics column {column!r}")
    lines = [f"t,{column}"]
    lines += [f"{_num(r.t)},{_num(getattr(r, column))}" for r in rows]
    return "\n".join(lines) + "\n"


def read_plot_data(text: str) -> tuple[list, np.ndarray]:
    """Header names and a float array of the rows."""
    head, *body = text.strip().splitlines()
    return head.split(","), np.array([[float(x) for x in b.split(",")] for b in body])
