"""Snapshots, JSON reports and CSV tables.

Snapshot layout (little-endian)::

    magic   4 bytes  b"DBEC"
    version u32      1
    n       3 x u32  points per axis
    L       3 x f64  half-box lengths
    data    n1*n2*n3 complex128, x1 fastest (Fortran order of the [i1,i2,i3] array)

Reports are JSON with sorted keys; floats keep their shortest round-trip
repr, so reading a report back gives bit-identical numbers. CSV cells use
17 significant digits.
"""

import csv
import enum
import json
import math
import os
import struct

import numpy as np

from .errors import FormatError, IoError
from .grid import GridSpec, WaveField

MAGIC = b"DBEC"
VERSION = 1
SUPPORTED_VERSIONS = (1,)
_HEADER = struct.Struct("<4sI3I3d")


def write_snapshot(path, u):
    if u.space != "physical":
        raise ValueError("snapshots store physical-space fields")
    head = _HEADER.pack(MAGIC, VERSION, *u.grid.n, *u.grid.L)
    data = np.asarray(u.values, dtype="<c16").ravel(order="F").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(head)
            fh.write(data)
    except OSError as e:
        raise IoError(f"cannot write snapshot {path}: {e}") from e


def read_snapshot(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise IoError(f"cannot read snapshot {path}: {e}") from e
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n1, n2, n3, L1, L2, L3 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version not in SUPPORTED_VERSIONS:
        raise FormatError(f"{path}: unsupported version {version}; supported versions: "
                          f"{', '.join(map(str, SUPPORTED_VERSIONS))}")
    n = (n1, n2, n3)
    expected = _HEADER.size + 16 * n1 * n2 * n3
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for grid {n}, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    try:
        grid = GridSpec(n, (L1, L2, L3))
    except ValueError as e:
        raise FormatError(f"{path}: invalid grid in header: {e}") from e
    return WaveField(grid, data.reshape(n, order="F"))


def to_jsonable(obj):
    """Plain JSON types: NaN/inf become None, enums their value, arrays lists."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return str(obj)


def write_report(path, data):
    try:
        with open(path, "w") as fh:
            json.dump(to_jsonable(data), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except OSError as e:
        raise IoError(f"cannot write report {path}: {e}") from e


def read_report(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise IoError(f"cannot read report {path}: {e}") from e


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(x) for x in r])
    except OSError as e:
        raise IoError(f"cannot write table {path}: {e}") from e


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def write_trajectory(path, traj):
    from .dynamics import COLUMNS

    write_csv(path, COLUMNS, traj.rows())


def ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)
    return path
