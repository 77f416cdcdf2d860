"""CSV/JSON writers for time series and run summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .series import CSV_COLUMNS, TimeSeries


def format_float(x) -> str:
    """17 significant digits: enough to round-trip every double."""
    return f"{float(x):.17g}"


def series_to_csv(series: TimeSeries) -> str:
    if len(series) == 0:
        raise ValueError("refusing to export an empty series")
    cols = series.columns()
    lines = [",".join(CSV_COLUMNS)]
    for i in range(len(series)):
        row = [str(int(cols["t"][i]))]
        row += [format_float(cols[name][i]) for name in CSV_COLUMNS[1:]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def jsonable(obj):
    """Convert numpy/complex values to plain JSON; NaN and inf become null."""
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
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(doc) -> str:
    return json.dumps(jsonable(doc), indent=2) + "\n"


def series_to_json(series: TimeSeries) -> str:
    if len(series) == 0:
        raise ValueError("refusing to export an empty series")
    return dumps_json({"n": series.n_vertices, "method": series.method, **series.columns()})


def write_text(text: str, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def export_series(series: TimeSeries, fmt: str, path) -> None:
    """Write ``series`` as CSV or JSON.  Nothing is created for an empty series."""
    if fmt == "csv":
        text = series_to_csv(series)
    elif fmt == "json":
        text = series_to_json(series)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    write_text(text, path)


def read_series_csv(path, n_vertices: int = 0, method: str = "csv") -> TimeSeries:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header {rows[:1]}")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return TimeSeries(
        n_vertices=n_vertices,
        method=method,
        t=data[:, 0].astype(int),
        nu_marked=data[:, 1],
        nu_unmarked=data[:, 2],
        norm_kn=data[:, 3],
    )
