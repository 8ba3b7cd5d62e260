"""Self-describing experiment reports: CSV tables plus a JSON summary."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__


@dataclass
class Table:
    """Rows of a CSV payload; ``units`` maps column -> (unit, provenance)."""

    columns: Sequence[str]
    rows: list = field(default_factory=list)
    units: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = list(self.columns).index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and callable(v.item):  # numpy scalar
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass
class ExperimentReport:
    name: str
    metadata: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    attachments: dict = field(default_factory=dict)  # file name -> bytes

    def __post_init__(self):
        self.metadata.setdefault("code_version", __version__)
        self.metadata.setdefault("created", datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def table(self, name: str, columns: Sequence[str], units: dict | None = None) -> Table:
        t = Table(list(columns), [], dict(units or {}))
        self.tables[name] = t
        return t

    def summary_json(self) -> str:
        units = {n: t.units for n, t in self.tables.items() if t.units}
        doc = {"name": self.name, "metadata": self.metadata, "summary": self.summary, "units": units}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"

    def files(self) -> dict[str, bytes]:
        out = {f"{n}.csv": t.to_csv().encode("utf-8") for n, t in self.tables.items()}
        out.update(self.attachments)
        out["summary.json"] = self.summary_json().encode("utf-8")
        return out

    def write(self, directory) -> list[Path]:
        """Write all files; each appears atomically and only after every payload is staged."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for name, data in self.files().items():
                fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                staged.append((tmp, directory / name))
        except BaseException:
            for tmp, _ in staged:
                os.unlink(tmp)
            raise
        for tmp, dest in staged:
            os.replace(tmp, dest)
        return [d for _, d in staged]


def loglog_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if lx.size < 2:
        raise ValueError("need at least two points for a fit")
    slope, icpt = np.polyfit(lx, ly, 1)
    return float(slope), float(icpt)

