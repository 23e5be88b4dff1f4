"""Result records and their CSV / JSON persistence."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

CSV_COLUMNS = ("experiment_id", "observable", "n", "beta", "bc", "h", "value", "std_error",
               "n_samples", "tau", "seed")
STAT_COLUMNS = ("value", "std_error", "n_samples", "tau")


@dataclass
class ResultRecord:
    experiment_id: str
    config_hash: str
    rows: list[dict] = field(default_factory=list)
    report: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    partial: bool = False

    def to_dict(self) -> dict:
        return {"experiment_id": self.experiment_id, "config_hash": self.config_hash,
                "partial": self.partial, "wall_clock": self.wall_clock, "rows": self.rows,
                **self.report}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(rows: list[dict], path, columns=CSV_COLUMNS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k)) for k in columns})
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    import numpy as np

    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")
