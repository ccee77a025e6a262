"""CSV writing/reading with '#' metadata comment lines and fixed float formatting."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Sequence


def fmt(value) -> str:
    if isinstance(value, (bool,)):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    try:
        import numpy as np

        if isinstance(value, np.integer):
            return str(int(value))
    except ImportError:  # pragma: no cover
        pass
    return f"{float(value):.17g}"


def render(columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping[str, object] | None = None) -> str:
    buf = io.StringIO()
    for key, val in (meta or {}).items():
        buf.write(f"# {key}={val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write(path, columns, rows, meta=None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render(columns, rows, meta))


def read(path) -> tuple[dict, list[dict]]:
    """Return (metadata, rows) where rows are dicts of strings."""
    meta = {}
    lines = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))
