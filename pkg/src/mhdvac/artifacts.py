"""Deterministic on-disk run artifacts.

Layout of an artifact directory:
  run.json     resolved config echo plus scalar summaries (no timestamps)
  series.csv   energy/constraint time series, fixed column schema
  growth.csv   mode-scan output (k2, k3, sTension, growthRate), when produced
  spectra.csv  boundary-matrix spectra samples, when produced
  fields/      final fields as raw little-endian f64 + JSON headers

Identical configs produce byte-identical files: floats are written with
repr(), dict keys are sorted, and nothing time- or host-dependent is stored.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .diagnostics import SERIES_COLUMNS


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def write_series_csv(path, rows, columns=SERIES_COLUMNS):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")


def write_growth_csv(path, ks, s_tension, rates, k3=0.0):
    with open(path, "w") as fh:
        fh.write("k2,k3,sTension,growthRate\n")
        for k, r in zip(ks, rates):
            fh.write(f"{_fmt(k)},{_fmt(k3)},{_fmt(s_tension)},{_fmt(r)}\n")


def write_spectra_csv(path, entries):
    """entries: iterable of (matrix_name, sample_index, eigenvalues)."""
    with open(path, "w") as fh:
        fh.write("matrix,sample,idx,eig\n")
        for name, sample, eigs in entries:
            for i, e in enumerate(np.asarray(eigs)):
                fh.write(f"{name},{int(sample)},{i},{_fmt(e)}\n")


def write_field(dirpath, name, arr):
    """Raw row-major float64 dump with a JSON shape/dtype header."""
    os.makedirs(dirpath, exist_ok=True)
    arr = np.ascontiguousarray(arr, dtype="<f8")
    with open(os.path.join(dirpath, name + ".bin"), "wb") as fh:
        fh.write(arr.tobytes())
    write_json(
        os.path.join(dirpath, name + ".json"),
        {"shape": list(arr.shape), "dtype": "f64", "order": "row-major"},
    )


def read_field(dirpath, name):
    with open(os.path.join(dirpath, name + ".json")) as fh:
        header = json.load(fh)
    raw = np.fromfile(os.path.join(dirpath, name + ".bin"), dtype="<f8")
    return raw.reshape(header["shape"])


def write_run_artifact(outdir, artifact):
    os.makedirs(outdir, exist_ok=True)
    write_json(
        os.path.join(outdir, "run.json"),
        {"config": artifact.config, "summary": artifact.summary},
    )
    write_series_csv(os.path.join(outdir, "series.csv"), artifact.series)
    fdir = os.path.join(outdir, "fields")
    write_field(fdir, "Udot", artifact.final.udot)
    write_field(fdir, "Vdot", artifact.final.vdot)
    write_field(fdir, "phi", artifact.final.phi)
