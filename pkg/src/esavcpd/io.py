"""CSV and JSON writers for trajectory records and reports."""
import json
import math
import subprocess
from pathlib import Path

import numpy as np

from . import __version__
from .harness import ConvergenceReport, TimingReport

CSV_COLUMNS = ("t", "x1", "x2", "x3", "v1", "v2", "v3", "aux", "H", "modified_energy", "rel_energy_err")


class IoError(OSError):
    pass


def git_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _fmt(v):
    return "%.17g" % v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _open(path):
    path = Path(path)
    if not path.parent.is_dir():
        raise IoError(f"cannot write {path}: directory {path.parent} does not exist")
    try:
        return path.open("w", newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc


def _provenance():
    return {"package_version": __version__, "git_describe": git_describe()}


def write_trajectory_csv(rec, path, metadata=None):
    """One row per recorded step (t=0 included), metadata as ``# key: value`` lines."""
    meta = {**rec.metadata, **(metadata or {}), **_provenance()}
    if rec.error:
        meta["error"] = rec.error
    with _open(path) as fh:
        for key in sorted(meta):
            fh.write(f"# {key}: {json.dumps(_jsonable(meta[key]), sort_keys=True)}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        cols = np.column_stack([rec.times, rec.x, rec.v, rec.aux, rec.H,
                                rec.modified_energy, rec.relative_energy_error]) if len(rec) else ()
        for row in cols:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trajectory_csv(path):
    """Inverse of ``write_trajectory_csv``: ``(metadata, {column: array})``."""
    meta, rows, header = {}, [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return meta, {name: data[:, i] for i, name in enumerate(header)}


def report_dict(report):
    if isinstance(report, ConvergenceReport):
        return {
            "scheme": report.scheme,
            "stepsizes": report.stepsizes,
            "errors": report.errors,
            "fitted_order": report.fitted_order,
            "used_in_fit": report.used,
            "exact_regime": report.exact_regime,
            "metadata": report.metadata,
        }
    if isinstance(report, TimingReport):
        return {
            "schemes": report.schemes,
            "eps_values": report.eps_values,
            "stepsizes": report.stepsizes,
            "repetitions": report.repetitions,
            "cells": report.cells,
            "metadata": report.metadata,
        }
    raise TypeError(f"cannot serialize {type(report).__name__}")


def write_report_json(report, path, metadata=None):
    """Write one report, or a list of them under a ``reports`` key."""
    if isinstance(report, (list, tuple)):
        body = {"reports": [report_dict(r) for r in report]}
    else:
        body = report_dict(report)
    body["provenance"] = {**(metadata or {}), **_provenance()}
    text = json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"
    with _open(path) as fh:
        fh.write(text)


def write_trajectory_json(rec, path, metadata=None):
    meta = {**rec.metadata, **(metadata or {}), **_provenance()}
    body = {"columns": {"t": rec.times, "x": rec.x, "v": rec.v, "aux": rec.aux, "H": rec.H,
                        "modified_energy": rec.modified_energy,
                        "rel_energy_err": rec.relative_energy_error},
            "error": rec.error, "metadata": meta}
    with _open(path) as fh:
        fh.write(json.dumps(_jsonable(body), indent=1, sort_keys=True) + "\n")
