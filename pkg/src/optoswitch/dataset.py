"""Tabular results with provenance, and their CSV/JSON serialization.

CSV layout::

    # metadata: {...one line of JSON...}
    delta[kappa],R_l[1],T_l[1],status[flag]
    -5,0.998...,0.001...,0

Values use ``%.<precision>g``; ``NaN`` appears only in observable columns
on rows whose ``status`` is nonzero. JSON is one object with ``metadata``,
``columns`` (name/unit pairs) and ``rows`` (lists, NaN written as null).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field

import numpy as np

DEFAULT_PRECISION = 12
_HEADER_TOKEN = re.compile(r"^(?P<name>[^\[\]]+)\[(?P<unit>[^\[\]]*)\]$")
_META_PREFIX = "# metadata: "


@dataclass
class Dataset:
    columns: list[tuple[str, str]]
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.names.index(name)]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def header(self) -> list[str]:
        return [f"{name}[{unit}]" for name, unit in self.columns]

    def to_csv(self, precision: int = DEFAULT_PRECISION) -> str:
        buf = io.StringIO()
        buf.write(_META_PREFIX + json.dumps(self.metadata, sort_keys=True, allow_nan=False, default=_jsonable) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows:
            writer.writerow([_fmt(v, precision) for v in row])
        return buf.getvalue()

    def to_json(self, precision: int = DEFAULT_PRECISION) -> str:
        payload = {
            "metadata": self.metadata,
            "columns": [{"name": n, "unit": u} for n, u in self.columns],
            "rows": [[_round(v, precision) for v in row] for row in self.rows],
        }
        return json.dumps(payload, sort_keys=True, allow_nan=False, default=_jsonable) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> Dataset:
        lines = text.splitlines()
        metadata = {}
        if lines and lines[0].startswith(_META_PREFIX):
            metadata = json.loads(lines[0][len(_META_PREFIX):])
            lines = lines[1:]
        reader = csv.reader(lines)
        header = next(reader)
        columns = []
        for token in header:
            m = _HEADER_TOKEN.match(token)
            if not m:
                raise ValueError(f"bad header token {token!r}; expected name[unit]")
            columns.append((m["name"], m["unit"]))
        rows = [[float(v) for v in row] for row in reader if row]
        return cls(columns, np.array(rows, dtype=float).reshape(-1, len(columns)), metadata)

    @classmethod
    def from_json(cls, text: str) -> Dataset:
        payload = json.loads(text)
        columns = [(c["name"], c["unit"]) for c in payload["columns"]]
        rows = [[math.nan if v is None else v for v in row] for row in payload["rows"]]
        return cls(columns, np.array(rows, dtype=float).reshape(-1, len(columns)), payload["metadata"])

    def serialize(self, fmt: str = "csv", precision: int = DEFAULT_PRECISION) -> str:
        if fmt == "csv":
            return self.to_csv(precision)
        if fmt == "json":
            return self.to_json(precision)
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path, fmt: str = "csv", precision: int = DEFAULT_PRECISION) -> None:
        atomic_write(path, self.serialize(fmt, precision))


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value: float, precision: int) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{precision}g")


def _round(value: float, precision: int):
    if not math.isfinite(value):
        return None
    return float(format(value, f".{precision}g"))


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
