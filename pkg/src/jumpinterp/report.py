"""Machine-readable records for inequality checks and suite runs."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__


def safe_ratio(lhs, rhs):
    """lhs / rhs with 0/0 -> 0 and x/0 -> inf."""
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


@dataclass
class Check:
    """One evaluated inequality ``lhs <= bound`` together with its inputs."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    ratio: float = None

    def __post_init__(self):
        if self.ratio is None:
            self.ratio = safe_ratio(self.lhs, self.rhs)

    def to_dict(self):
        return jsonable(asdict(self))


@dataclass
class Report:
    """Outcome of a verification suite."""

    suite: str
    params: dict
    seed: int = None
    records: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    passed: bool = True
    version: str = __version__

    def add(self, lhs, rhs, ratio=None, param=None, witness=None, holds=True, **extra):
        rec = {
            "param": param,
            "lhs": lhs,
            "rhs": rhs,
            "ratio": safe_ratio(lhs, rhs) if ratio is None else ratio,
            "holds": bool(holds),
        }
        if witness is not None:
            rec["witness"] = witness
        rec.update(extra)
        self.records.append(rec)
        if not holds:
            self.passed = False
        return rec

    def fail(self, message, instance=None):
        self.passed = False
        self.failures.append({"message": message, "instance": instance})

    def summarize(self, key="ratio"):
        vals = [r[key] for r in self.records if r.get(key) is not None]
        finite = [v for v in vals if math.isfinite(v)]
        self.aggregate.setdefault("count", len(vals))
        self.aggregate.setdefault("max_" + key, max(vals) if vals else None)
        self.aggregate.setdefault("mean_" + key, float(np.mean(finite)) if finite else None)
        self.aggregate.setdefault("violations", sum(1 for r in self.records if not r["holds"]))
        return self.aggregate

    def to_dict(self):
        return jsonable(asdict(self))

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "lhs", "rhs", "ratio"])
            for r in self.records:
                w.writerow([json.dumps(jsonable(r.get("param"))), r["lhs"], r["rhs"], r["ratio"]])
