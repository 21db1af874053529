"""CSV / JSON artifact writers.

Every file is written to a temporary sibling and moved into place with
os.replace, so a reader never sees a half-written artifact.  Both formats
embed the resolved run configuration and the tool version: CSV files as
leading ``#`` comment lines, JSON files under ``"config"`` / ``"version"``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

VERSION = "0.1.0"
FLOAT_FMT = "{:.17g}"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return str(v.item())
    return str(v)


def to_plain(obj):
    """Recursively convert numpy / mpmath values into JSON-serializable ones."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if hasattr(obj, "value") and isinstance(obj.value, str):  # enums
        return obj.value
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows, config=None):
    buf = io.StringIO()
    if config is not None:
        buf.write("# config " + json.dumps(to_plain(config), sort_keys=True) + "\n")
        buf.write(f"# version {VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, config=None):
    return atomic_write_text(path, csv_text(header, rows, config))


def json_text(payload, config=None):
    doc = dict(to_plain(payload))
    if config is not None:
        doc["config"] = to_plain(config)
        doc["version"] = VERSION
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, payload, config=None):
    return atomic_write_text(path, json_text(payload, config))


def read_csv(path):
    """(config or None, header, rows) from a file written by ``write_csv``."""
    config = None
    lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# config "):
                config = json.loads(line[len("# config ") :])
            elif not line.startswith("#"):
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return config, header, [row for row in reader]
