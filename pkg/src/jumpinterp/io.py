"""Reading inputs from JSON/CSV with line- and field-level diagnostics."""

import csv
import json
from pathlib import Path

import numpy as np

from .core import BNorm, TimeSeries
from .errors import InputError
from .lorentz import SampledProcess
from .markov import DoublyStochasticMatrix
from .martingale import FiniteMartingale
from .sampling import LatticeSequence

__all__ = ["load_json", "read_csv_matrix", "read_timeseries", "read_process",
           "read_martingale", "read_matrix", "read_sequence", "read_multiplier_config"]


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def read_csv_matrix(path):
    """Rows of floats; a header row of non-numbers is skipped."""
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header
                bad = next(i for i, c in enumerate(cells) if not _is_float(c))
                raise InputError(f"{path}: line {lineno}, column {bad + 1}: "
                                 f"{cells[bad]!r} is not a number", item=(lineno, bad + 1)) from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputError(f"{path}: data row {i + 1} has {len(r)} columns, expected {width}", item=i + 1)
    return np.asarray(rows)


def _is_float(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _field(d, key, path):
    if not isinstance(d, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    if key not in d:
        raise InputError(f"{path}: missing field {key!r}", item=key)
    return d[key]


def _build(cls, d, path, required):
    for key in required:
        _field(d, key, path)
    try:
        return cls.from_dict(d)
    except (InputError, ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_timeseries(path, s=2.0):
    """JSON ``{labels, values, norm}`` or CSV (one row per index, columns = coordinates)."""
    if str(path).endswith(".csv"):
        arr = read_csv_matrix(path)
        return TimeSeries(arr, bnorm=BNorm(m=arr.shape[1], s=s))
    d = load_json(path)
    if isinstance(d, list):
        return TimeSeries(np.asarray(d, dtype=float))
    return _build(TimeSeries, d, path, ["values"])


def read_process(path):
    return _build(SampledProcess, load_json(path), path, ["space", "values"])


def read_martingale(path):
    return _build(FiniteMartingale, load_json(path), path, ["weights", "partitions", "values"])


def read_matrix(path):
    """Dense doubly stochastic matrix from CSV or JSON ``{matrix, weights}``."""
    if str(path).endswith(".csv"):
        return DoublyStochasticMatrix(read_csv_matrix(path))
    d = load_json(path)
    if isinstance(d, list):
        d = {"matrix": d}
    return _build(DoublyStochasticMatrix, d, path, ["matrix"])


def read_sequence(path):
    """Finitely supported sequence: JSON list, ``{start, values}``, or CSV."""
    if str(path).endswith(".csv"):
        return LatticeSequence(read_csv_matrix(path))
    d = load_json(path)
    if isinstance(d, list):
        return LatticeSequence(np.asarray(d, dtype=float))
    vals = np.asarray(_field(d, "values", path), dtype=float)
    if "imag" in d:
        vals = vals + 1j * np.asarray(d["imag"], dtype=float)
    return LatticeSequence(vals, d.get("start", 0))


def read_multiplier_config(path):
    d = load_json(path)
    _field(d, "kind", path)
    return d
