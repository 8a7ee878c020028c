"""Deterministic file output: JSON and CSV with 17-significant-digit floats.

All floats are printed with '%.17g' so identical configurations produce
byte-identical artifacts; files are written atomically (temp file + rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile


def fmt_float(x: float) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return str(x)


def dumps(obj, indent=0) -> str:
    """JSON with deterministic float formatting and stable key order."""
    pad = " " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(fmt_float(obj))  # not valid JSON numbers; quote them
        return fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        inner = ", ".join(dumps(v, indent) for v in obj)
        return f"[{inner}]"
    if isinstance(obj, dict):
        items = []
        for k in obj:
            items.append(f"{json.dumps(str(k))}: {dumps(obj[k], indent)}")
        return "{" + ", ".join(items) + "}"
    if hasattr(obj, "to_dict"):
        return dumps(obj.to_dict(), indent)
    raise TypeError(f"cannot serialize {type(obj)}")


def loads(text: str):
    return json.loads(text)


def write_text_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj):
    write_text_atomic(path, dumps(obj) + "\n")


def write_csv(path: str, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v)
                              for v in row))
    write_text_atomic(path, "\n".join(lines) + "\n")


def trajectory_csv_rows(traj):
    """Rows (t, components..., r, u) for a chart trajectory."""
    from .charts import get_chart, profile_from_state
    chart = get_chart(traj.chart)
    header = ["t", *chart.components, "r", "u"]
    rows = []
    for t, s in zip(traj.times, traj.states):
        r, u, _ = profile_from_state(traj.chart, t, s, traj.params)
        rows.append((float(t), *[float(v) for v in s], float(r), float(u)))
    return header, rows


def profile_csv_rows(profile, r_grid, residuals=None):
    header = ["r", "u", "du", "residual"]
    rows = []
    for i, r in enumerate(r_grid):
        u, du = profile.fn(float(r))
        res = residuals[i] if residuals is not None else ""
        rows.append((float(r), float(u), float(du), res))
    return header, rows
