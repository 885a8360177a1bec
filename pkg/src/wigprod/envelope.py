"""Run configuration, result envelopes and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "ResultEnvelope",
    "jsonable",
    "csv_text",
    "write_csv",
]

SCHEMA_VERSION = 1
TOOL = "wigprod"


@dataclass
class ExperimentConfig:
    """Everything a run needs; ``workers`` and ``out`` never influence the payload."""

    command: str
    n: int
    m: int = 1
    dist: str | None = None
    identity: str | None = None
    samples: int | None = None
    reps: int | None = None
    seed: int = 0
    z_threshold: float = 5.0
    r: int | None = None
    diag_factor: float = 1.0
    sigma: float = 1.0
    beta: int | None = None
    check: str | None = None
    epsilon: float = 0.1
    compare_closed_form: bool = False
    compare_zeros: bool = False
    emit_complex_zeros: str | None = None
    out: str | None = None
    format: str = "json"
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def jsonable(obj: Any) -> Any:
    """Plain-JSON view: numpy scalars unwrapped, NaN -> None, infinities -> strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


@dataclass
class ResultEnvelope:
    config: ExperimentConfig
    payload_type: str
    payload: dict
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION
    tool: str = TOOL
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool": self.tool,
            "version": self.version,
            "config": self.config.to_dict(),
            "wall_time": self.wall_time,
            "payload_type": self.payload_type,
            "payload": jsonable(self.payload),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultEnvelope":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported envelope schema {d.get('schema_version')!r}")
        return cls(
            config=ExperimentConfig.from_dict(d["config"]),
            payload_type=d["payload_type"],
            payload=d["payload"],
            wall_time=float(d.get("wall_time", 0.0)),
            schema_version=d["schema_version"],
            tool=d.get("tool", TOOL),
            version=d.get("version", __version__),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ResultEnvelope":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _cell(v: Any) -> str:
    v = jsonable(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def csv_text(rows: Iterable[dict], columns: list[str]) -> str:
    """Header plus one line per row; floats in shortest round-trip form."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path: str | Path, rows: Iterable[dict], columns: list[str]) -> None:
    Path(path).write_text(csv_text(rows, columns), newline="")
