"""Text formats: matrices, key=value run configs and experiment CSVs.

Matrix files (``.mtx`` by local convention, not Matrix Market) hold the
shape on the first line and one space-separated row per following line.
Entries use Python's shortest round-trip float representation, so a
write/read cycle is exact.
"""

import math
from pathlib import Path

import numpy as np

from .errors import FormatError


def format_float(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def matrix_text(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={A.ndim}")
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in A)
    return "\n".join(lines) + "\n"


def parse_matrix(text, path=None):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty matrix file", path, 1)
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("header must be 'rows cols'", path, 1)
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(f"non-integer shape {lines[0]!r}", path, 1) from None
    if rows < 0 or cols < 0:
        raise FormatError(f"negative shape {rows}x{cols}", path, 1)
    body = lines[1:]
    if len(body) != rows:
        # point at the first missing or surplus row
        line = len(lines) + 1 if len(body) < rows else rows + 2
        raise FormatError(f"expected {rows} rows, found {len(body)}", path, line)
    out = np.empty((rows, cols))
    for i, line in enumerate(body):
        fields = line.split()
        if len(fields) != cols:
            raise FormatError(f"expected {cols} entries, found {len(fields)}", path, i + 2)
        try:
            out[i] = [float(f) for f in fields]
        except ValueError:
            raise FormatError("malformed number", path, i + 2) from None
        if not np.all(np.isfinite(out[i])):
            raise FormatError("non-finite entry", path, i + 2)
    return out


def read_matrix(path):
    return parse_matrix(Path(path).read_text(encoding="ascii"), str(path))


def write_matrix(path, A):
    Path(path).write_text(matrix_text(A), encoding="ascii", newline="\n")


# ------------------------------------------------------------ run configs


def config_text(values):
    """Serialise a flat mapping as ``key=value`` lines in insertion order."""
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = format_float(value)
        elif isinstance(value, (list, tuple)):
            value = ",".join(format_float(v) if isinstance(v, float) else str(v) for v in value)
        elif value is None:
            value = ""
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def parse_config(text, allowed=None, path=None):
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped.

    Values are returned as strings. With `allowed`, unknown keys raise.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError("expected key=value", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise FormatError("empty key", path, lineno)
        if allowed is not None and key not in allowed:
            raise FormatError(f"unknown key {key!r}", path, lineno)
        if key in values:
            raise FormatError(f"duplicate key {key!r}", path, lineno)
        values[key] = value
    return values


def read_config(path, allowed=None):
    return parse_config(Path(path).read_text(encoding="ascii"), allowed, str(path))


# -------------------------------------------------------------- CSV output


def _bool(b):
    return "true" if b else "false"


def phase_csv(grid):
    """One row per trial, then one ``trial=all`` summary row per cell.

    Errored trials carry ``rel_error=inf``. A summary row reports the
    largest trial error of the cell.
    """
    rows = ["r,rho,trial,rel_error,success,errored"]
    keys = [(r, rho) for r in grid.rank_axis for rho in grid.sparsity_axis]
    for r, rho in keys:
        cell = grid.cells[(r, rho)]
        for t, e in enumerate(cell.outcomes):
            bad = e is None
            err = math.inf if bad else e
            ok = (not bad) and e < 1e-3
            rows.append(f"{r},{format_float(rho)},{t},{format_float(err)},{_bool(ok)},{_bool(bad)}")
    for r, rho in keys:
        cell = grid.cells[(r, rho)]
        worst = math.inf if cell.errored else max(cell.rel_errors)
        rows.append(
            f"{r},{format_float(rho)},all,{format_float(worst)},{_bool(cell.success)},{_bool(cell.errored)}"
        )
    return "\n".join(rows) + "\n"


def sweep_csv(sweep):
    rows = ["kappa,lambda,rel_error"]
    for i, k in enumerate(sweep.kappa_axis):
        for j, lam in enumerate(sweep.lambda_axis):
            rows.append(f"{format_float(k)},{format_float(lam)},{format_float(sweep.rel_error[i, j])}")
    return "\n".join(rows) + "\n"


def parse_phase_csv(text):
    """Read a phase CSV back into ``{(r, rho, trial): (rel_error, success, errored)}``."""
    lines = text.strip("\n").split("\n")
    if lines[0] != "r,rho,trial,rel_error,success,errored":
        raise FormatError("unexpected phase CSV header", line=1)
    out = {}
    for lineno, line in enumerate(lines[1:], 2):
        f = line.split(",")
        if len(f) != 6:
            raise FormatError("expected 6 fields", line=lineno)
        trial = f[2] if f[2] == "all" else int(f[2])
        out[(int(f[0]), float(f[1]), trial)] = (float(f[3]), f[4] == "true", f[5] == "true")
    return out
