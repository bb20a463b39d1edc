"""Report records shared by the covering and inequality modules."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class InequalityReport:
    """Outcome of checking ``lhs >= rhs`` up to a propagated tolerance."""

    name: str
    lhs: float
    rhs: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(self.lhs) - float(self.rhs)

    @property
    def satisfied(self) -> bool:
        return bool(self.value >= -self.tol)

    @property
    def ratio(self) -> float:
        return float(self.lhs) / float(self.rhs) if self.rhs else math.inf

    def to_dict(self) -> dict:
        return jsonable({"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "value": self.value,
                         "ratio": self.ratio, "tol": self.tol, "satisfied": self.satisfied,
                         "details": self.details})


def jsonable(obj):
    """Convert numpy scalars/arrays and dataclass-like objects into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: jsonable(v) for k, v in row.items()})
    return path
