"""Report emission: one JSON document per run, optionally a flattened CSV.

Documents are byte-identical across runs for identical inputs and seed, so
nothing time- or schedule-dependent may enter them.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from . import __version__
from .errors import IoError


def build_document(command, parameters, items, status="ok", seed=None, extra=None):
    doc = {
        "metadata": {
            "tool": "fraisse",
            "version": __version__,
            "command": command,
            "seed": seed,
            "parameters": parameters,
        },
        "status": status,
        "items": items,
    }
    if extra:
        doc.update(extra)
    return doc


def render_report(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


def flatten_items(items):
    """Header row plus one row per item; nested values are JSON-encoded."""
    keys = sorted({k for item in items for k in item})
    rows = []
    for item in items:
        row = []
        for k in keys:
            v = item.get(k)
            if isinstance(v, (dict, list, tuple)):
                v = json.dumps(v, sort_keys=True)
            row.append("" if v is None else str(v))
        rows.append(row)
    return keys, rows


def render_csv(doc) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys, rows = flatten_items(doc.get("items", []))
    writer.writerow(keys)
    writer.writerows(rows)
    return buf.getvalue().encode()


def emit_report(doc, out_dir, name, fmt="json"):
    """Write <name>.json (always) and <name>.csv when fmt is csv."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{name}.json"]
        paths[0].write_bytes(render_report(doc))
        if fmt == "csv":
            p = out / f"{name}.csv"
            p.write_bytes(render_csv(doc))
            paths.append(p)
    except OSError as exc:
        raise IoError(f"cannot write report to {out}: {exc}") from exc
    return paths
