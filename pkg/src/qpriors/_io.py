from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path


def fmt(x) -> str:
    """Real number with 17 significant digits (round-trips a double)."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)):
        return str(x)
    return f"{float(x):.17g}"


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temp file and rename."""
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
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()
