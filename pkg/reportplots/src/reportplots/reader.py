"""Readers for run-artifact directories.

The series/growth/spectra CSV schemas are pinned to what the solver publishes;
any header deviation is a hard error naming the offending column.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

SERIES_COLUMNS = (
    "t",
    "I",
    "Itan1",
    "Ivac",
    "surfTerm",
    "ratio54",
    "divFluidMax",
    "divVacMax",
    "traceHNMax",
)
GROWTH_COLUMNS = ("k2", "k3", "sTension", "growthRate")
SPECTRA_COLUMNS = ("matrix", "sample", "idx", "eig")


class SchemaError(ValueError):
    def __init__(self, path, column):
        super().__init__(f"{path}: unexpected column {column!r}")
        self.column = column


def _read_csv(path, expected):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(path, "<empty file>")
    header = tuple(rows[0])
    if header != tuple(expected):
        for got, want in zip(header, expected):
            if got != want:
                raise SchemaError(path, got)
        extra = set(header) ^ set(expected)
        raise SchemaError(path, sorted(extra)[0] if extra else header[0])
    table = {c: [] for c in expected}
    for row in rows[1:]:
        for c, cell in zip(expected, row):
            table[c].append(cell)
    return table


def read_series(path):
    raw = _read_csv(path, SERIES_COLUMNS)
    return {c: [float(x) for x in raw[c]] for c in SERIES_COLUMNS}


def read_growth(path):
    raw = _read_csv(path, GROWTH_COLUMNS)
    return {c: [float(x) for x in raw[c]] for c in GROWTH_COLUMNS}


def read_spectra(path):
    raw = _read_csv(path, SPECTRA_COLUMNS)
    return {
        "matrix": raw["matrix"],
        "sample": [int(x) for x in raw["sample"]],
        "idx": [int(x) for x in raw["idx"]],
        "eig": [float(x) for x in raw["eig"]],
    }


@dataclass
class RunArtifactView:
    """One artifact directory plus series found in immediate subdirectories."""

    root: str
    config: dict = field(default_factory=dict)
    series: list = field(default_factory=list)  # (label, table)
    growth: list = field(default_factory=list)  # (label, table)
    spectra: dict | None = None

    @staticmethod
    def load(root: str) -> "RunArtifactView":
        view = RunArtifactView(root=root)
        runjson = os.path.join(root, "run.json")
        if os.path.exists(runjson):
            with open(runjson) as fh:
                view.config = json.load(fh)
        candidates = [("", root)]
        for name in sorted(os.listdir(root)):
            sub = os.path.join(root, name)
            if os.path.isdir(sub):
                candidates.append((name, sub))
        for label, d in candidates:
            s = os.path.join(d, "series.csv")
            if os.path.exists(s):
                view.series.append((label or os.path.basename(root), read_series(s)))
            g = os.path.join(d, "growth.csv")
            if os.path.exists(g):
                view.growth.append((label or os.path.basename(root), read_growth(g)))
        sp = os.path.join(root, "spectra.csv")
        if os.path.exists(sp):
            view.spectra = read_spectra(sp)
        if not view.series and not view.growth and view.spectra is None:
            raise FileNotFoundError(f"{root}: no series.csv, growth.csv or spectra.csv found")
        return view
