"""CSV rendering for analytics, attack-lab and benchmark reports."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import Any


def fmt(value: Any) -> str:
    # Floats: 10 significant digits.
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction | float):
        return f"{float(value):.10g}"
    try:
        return f"{float(value):.10g}"
    except (TypeError, ValueError):
        return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


# `lambda` is a Python keyword, so the field is `lam`.
COLUMN_NAMES = {"lam": "lambda"}


def param_columns(fields: Iterable[str]) -> list[str]:
    return [COLUMN_NAMES.get(f, f) for f in fields]


def render_sweep_csv(rows: Sequence[Any]) -> str:
    """Sweep rows: parameter columns, then the metric column ("invalid" for flagged rows)."""
    if not rows:
        return ""
    names = list(rows[0].params)
    header = [*param_columns(names), rows[0].metric]
    body = (
        [*(r.params[nm] for nm in names), r.value if r.valid else "invalid"] for r in rows
    )
    return render_csv(header, body)


ESTIMATE_HEADER = ("operation", "params", "trials", "estimate", "analytic", "z_score", "verdict")


def render_estimates_csv(rows: Iterable[Sequence[Any]]) -> str:
    return render_csv(ESTIMATE_HEADER, rows)
