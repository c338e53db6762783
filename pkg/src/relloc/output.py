"""CSV and summary files.

Every file opens with ``# key = value`` comment lines describing the run.
Floats are written with 17 significant digits so a parse reproduces them exactly.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(meta):
    return "".join(f"# {key} = {format_value(value)}\n" for key, value in meta.items())


def write_csv(path, columns, meta):
    """``columns`` maps header name to a sequence; all sequences share one length."""
    names = list(columns)
    length = len(columns[names[0]]) if names else 0
    buf = io.StringIO()
    buf.write(_header(meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for i in range(length):
        writer.writerow([format_value(columns[name][i]) for name in names])
    write_atomic(path, buf.getvalue())


def read_csv(path):
    """Return ``(meta, columns)``; numeric columns come back as float arrays."""
    meta = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(" = ")
            meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    names, data = rows[0], rows[1:]
    columns = {}
    for j, name in enumerate(names):
        raw = [row[j] for row in data]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = raw
    return meta, columns


def write_summary(path, values, meta):
    body = _header(meta) + "".join(f"{key} = {format_value(value)}\n" for key, value in values.items())
    write_atomic(path, body)


def read_summary(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or " = " not in line:
            continue
        key, _, value = line.partition(" = ")
        out[key] = value
    return out
