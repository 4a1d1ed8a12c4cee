"""CSV and summary-line writers.

All floats are written with 17 significant digits so that a value read back
is bit-identical, and rows are emitted in cell (or stream, index) order, so
equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .mapping import CompatibilityReport
from .measure import GridMeasure
from .sampling import ParticleMeasure

__all__ = [
    "fmt",
    "measure_csv",
    "compat_csv",
    "particles_csv",
    "summary_lines",
    "write_text",
]


def fmt(x) -> str:
    """17-significant-digit decimal form of a float; ints pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _rows_to_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def measure_csv(m: GridMeasure) -> str:
    """``cell_label,volume,density,probability`` with probability = density * volume."""
    s = m.space
    rows = (
        (lab, fmt(v), fmt(d), fmt(d * v))
        for lab, v, d in zip(s.labels, s.volumes, m.density)
    )
    return _rows_to_text(("cell_label", "volume", "density", "probability"), rows)


def compat_csv(report: CompatibilityReport) -> str:
    """``cell,lhs_density,rhs_density,gap`` rows then ``max_abs_gap=<g>``."""
    lhs, rhs = report.lhs.density, report.rhs.density
    rows = (
        (lab, fmt(a), fmt(b), fmt(abs(a - b)))
        for lab, a, b in zip(report.lhs.space.labels, lhs, rhs)
    )
    text = _rows_to_text(("cell", "lhs_density", "rhs_density", "gap"), rows)
    return text + f"max_abs_gap={fmt(report.max_abs_gap)}\n"


def particles_csv(p: ParticleMeasure) -> str:
    """``stream,index,cell_or_coords,weight``; ``index`` counts within a stream.

    Cell particles are written by label; coordinate particles as their
    components joined by ``;``.
    """
    streams = p.streams if p.streams is not None else np.zeros(len(p), dtype=np.int64)
    order = np.argsort(streams, kind="stable")
    counters: dict = {}
    rows = []
    labels = p.space.labels if p.is_cellular else None
    for k in order:
        s = int(streams[k])
        idx = counters.get(s, 0)
        counters[s] = idx + 1
        if labels is not None:
            where = labels[int(p.points[k])]
        else:
            where = ";".join(fmt(c) for c in p.points[k])
        rows.append((s, idx, where, fmt(p.weights[k])))
    return _rows_to_text(("stream", "index", "cell_or_coords", "weight"), rows)


def summary_lines(items: Mapping[str, object] | Iterable) -> str:
    """One ``key=value`` line per item."""
    pairs = items.items() if isinstance(items, Mapping) else items
    return "".join(f"{k}={fmt(v)}\n" for k, v in pairs)


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return path
