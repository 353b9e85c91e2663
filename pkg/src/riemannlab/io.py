"""CSV/JSON writers and the run manifest.

CSV files open with a ``#``-prefixed block echoing the run parameters;
complex numbers become two columns (``re``, ``im``) in CSV and ``{"re", "im"}``
objects in JSON.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def to_jsonable(obj):
    """Recursively convert numpy, complex and Fraction values for json."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(obj.real)), "im": to_jsonable(float(obj.imag))}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        if math.isnan(x):
            return "nan"
        return x
    return obj


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, columns, rows, header=None):
    """Write rows under a '#' header block; returns the path."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {json.dumps(to_jsonable(value), sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (header dict, column names, rows of strings)."""
    header, lines = {}, []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                header[key] = json.loads(value)
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    return header, rows[0], rows[1:]


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    flags: dict
    seed: int = 0
    version: str = __version__
    wall_time: float = 0.0
    digests: dict = field(default_factory=dict)
    python: str = field(default_factory=platform.python_version)

    def record(self, *paths):
        for p in paths:
            self.digests[Path(p).name] = file_digest(p)

    def write(self, path):
        return write_json(path, asdict(self))
