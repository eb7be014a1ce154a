"""Text formats: field CSV files and key=value reports.

Field files look like::

    # dim=2
    # h=0.5
    # bounds=0,1,0,1
    0,0,0,0,1.25
    0,1,0,0.5,1.5
    ...

one row ``i[,j],x[,y],value`` per node in row-major order.  Numbers are
written with 17 significant digits so that reading a file back reproduces
every double exactly.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .coneops import ScalarField
from .errors import FormatError, LatticeError
from .lattice import build_domain


def fmt(x):
    """Round-trip-exact decimal text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_field(f, path):
    dom = f.domain
    flat_bounds = [c for pair in dom.bounds for c in pair]
    lines = [f"# dim={dom.d}", f"# h={fmt(dom.h)}", f"# bounds={','.join(fmt(c) for c in flat_bounds)}"]
    axes = [dom.axis_coords(k) for k in range(dom.d)]
    for index in dom.indices():
        coords = [axes[k][i] for k, i in enumerate(index)]
        row = [str(i) for i in index] + [fmt(c) for c in coords] + [fmt(f.values[index])]
        lines.append(",".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _header(line, lineno, key):
    prefix = f"# {key}="
    if not line.startswith(prefix):
        raise FormatError(f"expected header '{prefix}<value>'", lineno)
    return line[len(prefix):]


def read_field(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3:
        raise FormatError("missing header lines", len(lines) + 1)
    try:
        d = int(_header(lines[0], 1, "dim"))
        h = float(_header(lines[1], 2, "h"))
        bounds = [float(t) for t in _header(lines[2], 3, "bounds").split(",")]
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed header value ({exc})", None) from exc
    if len(bounds) != 2 * d:
        raise FormatError(f"dim={d} needs {2 * d} bound values, got {len(bounds)}", 3)
    try:
        dom = build_domain(bounds, h, d)
    except LatticeError as exc:
        raise FormatError(str(exc), 2) from exc
    rows = [(n, line) for n, line in enumerate(lines[3:], start=4) if line.strip()]
    if len(rows) != dom.size:
        raise FormatError(f"expected {dom.size} data rows for shape {dom.shape}, got {len(rows)}",
                          rows[-1][0] if rows else 4)
    axes = [dom.axis_coords(k) for k in range(d)]
    values = np.empty(dom.shape)
    for (lineno, line), index in zip(rows, dom.indices()):
        parts = line.split(",")
        if len(parts) != 2 * d + 1:
            raise FormatError(f"expected {2 * d + 1} columns, got {len(parts)}", lineno)
        try:
            got = tuple(int(p) for p in parts[:d])
            coords = [float(p) for p in parts[d:2 * d]]
            value = float(parts[-1])
        except ValueError as exc:
            raise FormatError(f"unparsable number ({exc})", lineno) from exc
        if got != index:
            raise FormatError(f"node {got} out of row-major order, expected {index}", lineno)
        for k, c in enumerate(coords):
            if not math.isclose(c, axes[k][index[k]], rel_tol=1e-12, abs_tol=1e-12 * h):
                raise FormatError(f"coordinate {c} does not match node {index}", lineno)
        if not math.isfinite(value):
            raise FormatError("non-finite value", lineno)
        values[index] = value
    return ScalarField(dom, values)


def _format_value(v):
    if isinstance(v, (tuple, list)):
        return ",".join(_format_value(x) for x in v)
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    return fmt(v)


def _pairs(obj, timing):
    if dataclasses.is_dataclass(obj):
        items = [(f.name, getattr(obj, f.name)) for f in dataclasses.fields(obj)]
    else:
        items = list(obj.items())
    for key, value in items:
        if key == "wall_time" and not timing:
            continue
        if key == "witness":
            if not value:
                yield "witness", "none"
                continue
            head = value.get("node")
            yield "witness", _format_value(head) if head is not None else "none"
            for wk in sorted(k for k in value if k != "node"):
                yield f"witness.{wk}", _format_value(value[wk])
        elif key == "details":
            for dk in sorted(value):
                yield dk, _format_value(value[dk])
        else:
            yield key, _format_value(value)


def format_report(sections, timing=False):
    """Render ``[(title, record), ...]`` as ``[title]`` blocks of ``key=value`` lines.

    Records are dataclasses (reports, check results, convergence rows) or
    plain mappings.  Wall-clock time is left out unless ``timing`` is set so
    that identical runs produce identical files.
    """
    out = []
    for title, obj in sections:
        if out:
            out.append("")
        out.append(f"[{title}]")
        out.extend(f"{k}={v}" for k, v in _pairs(obj, timing))
    return "\n".join(out) + "\n"


def write_report(sections, path, timing=False):
    text = format_report(sections, timing)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_report(path):
    """Parse a report back into ``{title: {key: text}}``."""
    blocks, current = {}, None
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = blocks.setdefault(line[1:-1], {})
            elif "=" in line and current is not None:
                k, _, v = line.partition("=")
                current[k] = v
            else:
                raise FormatError("expected '[section]' or 'key=value'", n)
    return blocks
