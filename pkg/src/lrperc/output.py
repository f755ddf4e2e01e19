"""Versioned, atomically written output files.

CSV files start with a ``# lrperc <kind> v<version>`` comment line. JSON files
hold two lines: a JSON header object (format and version) and the payload.
Floats are written with ``repr`` so reruns produce identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

FORMAT_VERSION = 1

ROW_COLUMNS = ("experiment", "d", "family", "beta", "n", "statistic", "mean", "stderr",
               "replicates", "seed", "note")


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    if hasattr(v, "item"):  # numpy scalar
        return _cell(v.item())
    return str(v)


def csv_bytes(kind: str, columns: Sequence[str], rows: Iterable) -> bytes:
    buf = io.StringIO()
    buf.write(f"# lrperc {kind} v{FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(c) for c in columns]
        w.writerow([_cell(v) for v in row])
    return buf.getvalue().encode()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _jsonable(v.item())
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def json_bytes(kind: str, payload) -> bytes:
    head = json.dumps({"format": f"lrperc-{kind}", "version": FORMAT_VERSION}, sort_keys=True)
    body = json.dumps(_jsonable(payload), sort_keys=True)
    return (head + "\n" + body + "\n").encode()


def write_csv(path, kind: str, columns: Sequence[str], rows: Iterable) -> Path:
    atomic_write(path, csv_bytes(kind, columns, rows))
    return Path(path)


def write_json(path, kind: str, payload) -> Path:
    atomic_write(path, json_bytes(kind, payload))
    return Path(path)


def read_json(path) -> tuple:
    """Return ``(header, payload)`` of a file written by :func:`write_json`."""
    lines = Path(path).read_text().splitlines()
    return json.loads(lines[0]), json.loads(lines[1])


def read_csv(path) -> tuple:
    """Return ``(header_line, rows as dicts)``."""
    text = Path(path).read_text().splitlines()
    return text[0], list(csv.DictReader(text[1:]))


def write_rows(path_stem, kind: str, rows: Sequence[dict], fmt: str = "csv",
               columns: Sequence[str] = ROW_COLUMNS) -> Path:
    if fmt == "csv":
        return write_csv(f"{path_stem}.csv", kind, columns, rows)
    if fmt == "json":
        return write_json(f"{path_stem}.json", kind, [{c: r.get(c) for c in columns} for r in rows])
    raise ValueError(f"unknown format {fmt!r}")


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


__all__ = ["atomic_write", "csv_bytes", "json_bytes", "write_csv", "write_json", "write_rows",
           "read_json", "read_csv", "sha256", "ROW_COLUMNS", "FORMAT_VERSION"]
