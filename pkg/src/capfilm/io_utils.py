"""Deterministic file output: atomic writes, fixed-width float printing.

Reports must be byte-identical across runs of the same config, so floats are
rendered with %.17g (shortest exact-roundtrip width), keys are emitted in
insertion order, and writes go through a temp file + rename.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

__all__ = [
    "atomic_write_text",
    "dumps_json",
    "write_json",
    "write_csv",
    "fmt_float",
]


def fmt_float(x: float) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return str(x)


def _render(obj, indent: int) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_render(v, indent + 2)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{pad}  {_render(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, (int,)):
        return str(obj)
    return json.dumps(str(obj))


def dumps_json(obj) -> str:
    """JSON text with floats at 17 significant digits, stable ordering."""
    return _render(_pyify(obj), 0) + "\n"


def _pyify(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, str(path))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def write_csv(path, header, rows) -> None:
    """rows: iterable of sequences; floats printed at 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(float(x)) if isinstance(x, (int, float)) else str(x) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
