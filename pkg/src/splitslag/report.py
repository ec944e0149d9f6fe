"""Per-node residual reports shared by the surface-level checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _clean(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not np.isfinite(x) else x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()] if x.ndim else _clean(x.item())
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    return x


@dataclass
class ResidualReport:
    """values: the main per-node residual (NaN where a node is excluded);
    series: further per-node quantities (margins, secondary residuals)."""
    values: np.ndarray
    points: np.ndarray
    flags: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    excluded: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.points = np.asarray(self.points, dtype=float)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def max(self) -> float:
        v = np.abs(self.values[self.valid])
        return float(v.max()) if v.size else float("nan")

    @property
    def mean(self) -> float:
        v = np.abs(self.values[self.valid])
        return float(v.mean()) if v.size else float("nan")

    @property
    def witness(self) -> Optional[dict]:
        v = np.where(self.valid, np.abs(self.values), -np.inf)
        if not self.valid.any():
            return None
        i = int(np.argmax(v))
        return {"index": i, "point": _clean(self.points[i]), "value": float(self.values[i])}

    def series_max(self, key: str) -> float:
        s = np.abs(np.asarray(self.series[key], dtype=float))
        s = s[np.isfinite(s)]
        return float(s.max()) if s.size else float("nan")

    def series_min(self, key: str) -> float:
        s = np.asarray(self.series[key], dtype=float)
        s = s[np.isfinite(s)]
        return float(s.min()) if s.size else float("nan")

    def summary(self) -> dict:
        out = {"max": self.max, "mean": self.mean, "excluded": self.excluded,
               "nodes": int(self.values.size), "flags": self.flags, "witness": self.witness}
        for k in sorted(self.series):
            out[f"{k}_max_abs"] = self.series_max(k)
            out[f"{k}_min"] = self.series_min(k)
        out.update(self.notes)
        return _clean(out)

    def to_json(self, per_node: bool = False) -> dict:
        out = self.summary()
        if per_node:
            out["points"] = _clean(self.points)
            out["values"] = _clean(self.values)
            out["series"] = {k: _clean(np.asarray(v)) for k, v in sorted(self.series.items())}
        return out

    def csv_rows(self) -> tuple:
        keys = sorted(self.series)
        d = self.points.shape[1] if self.points.ndim == 2 else 1
        header = [f"p{i + 1}" for i in range(d)] + ["residual"] + keys
        rows = []
        P = self.points.reshape(len(self.values), -1)
        for i in range(len(self.values)):
            rows.append(list(P[i]) + [self.values[i]] + [np.asarray(self.series[k])[i] for k in keys])
        return header, rows
