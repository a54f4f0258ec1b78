"""Deterministic file output: CSV, JSON reports and run manifests."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_text(header, rows))


def json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, json_text(obj))


def manifest_path(primary) -> Path:
    primary = Path(primary)
    return primary.with_name(primary.stem + ".manifest.json")


def write_manifest(primary, command: str, parameters: dict, seed: int, version: str,
                   outputs) -> Path:
    """Written after every data file so its presence marks a complete run."""
    manifest = {
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "tool_version": version,
        "outputs": [str(p) for p in outputs],
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return write_json(manifest_path(primary), manifest)
