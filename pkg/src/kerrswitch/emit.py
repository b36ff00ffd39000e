"""CSV and JSON writers with byte-stable output.

CSV follows RFC 4180 (CRLF line ends, minimal quoting) and writes floats in
their shortest round-trip form. JSON sorts keys and carries a metadata block.
Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def metadata_block(config: dict, seed=None, timestamp: bool = True) -> dict:
    meta = {"version": __version__, "config": config, "seed": seed}
    if timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def json_text(record: dict, metadata: dict) -> str:
    return json.dumps(jsonable({"metadata": metadata, "result": record}), sort_keys=True, indent=2) + "\n"


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_text(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_bytes(data: bytes, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.buffer.write(data)
        return
    with open(path, "wb") as fh:
        fh.write(data)
