"""Reading and writing the CSV/TSV/JSON files used by the command line."""

from __future__ import annotations

import csv
import hashlib
import json
import re
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

from . import __version__
from .errors import DataError
from .forest import Forest


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def provenance(config_digest: str = "", inputs: Iterable = ()) -> str:
    """One-line comment recording tool version, config hash and input hashes."""
    parts = [f"forestdensity {__version__}", f"config={config_digest or '-'}"]
    ins = [f"{Path(p).name}:{file_digest(p)[:16]}" for p in inputs]
    parts.append("inputs=" + (",".join(ins) if ins else "-"))
    return "# " + " ".join(parts)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_csv(path) -> Tuple[np.ndarray, Optional[List[str]]]:
    """Parse a numeric CSV; returns ``(data, header)``.

    Lines starting with ``#`` are comments.  A first row containing any
    non-numeric cell is taken as the header.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].lstrip().startswith("#")):
                continue
            if all(not c.strip() for c in row):
                continue
            rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise DataError(f"{path}: no data rows")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: header but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    out = np.empty((len(rows), width))
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataError(f"{path}: line {lineno} has {len(cells)} columns, expected {width}")
        for c, cell in enumerate(cells):
            try:
                out[r, c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: line {lineno}, column {c + 1}: not a number: {cell!r}") from None
    if not np.all(np.isfinite(out)):
        r, c = np.argwhere(~np.isfinite(out))[0]
        raise DataError(f"{path}: line {rows[r][0]}, column {c + 1}: non-finite value")
    return out, header


def write_csv(path, data, header_line: str = "", columns: Optional[List[str]] = None):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    with open(path, "w", newline="") as fh:
        if header_line:
            fh.write(header_line + "\n")
        if columns:
            fh.write(",".join(columns) + "\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_table(path, rows, columns: List[str], header_line: str = "", sep: str = ","):
    with open(path, "w", newline="") as fh:
        if header_line:
            fh.write(header_line + "\n")
        fh.write(sep.join(columns) + "\n")
        for row in rows:
            fh.write(sep.join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_matrix_tsv(path, matrix, header_line: str = ""):
    """``d`` rows of tab-separated decimals with 12 significant digits."""
    M = np.asarray(matrix, dtype=float)
    with open(path, "w") as fh:
        if header_line:
            fh.write(header_line + "\n")
        for row in M:
            fh.write("\t".join(f"{v:.12g}" for v in row) + "\n")


def read_matrix_tsv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            rows.append([float(c) for c in line.rstrip("\n").split("\t")])
    return np.array(rows)


def write_forest_tsv(path, forest: Forest, k: Optional[int] = None, header_line: str = ""):
    """Edge list ``i<TAB>j<TAB>weight`` under a ``# d=<d> k=<k>`` line."""
    k = len(forest) if k is None else k
    with open(path, "w") as fh:
        if header_line:
            fh.write(header_line + "\n")
        fh.write(f"# d={forest.d} k={k}\n")
        for i, j, w in forest.edges:
            fh.write(f"{i}\t{j}\t{w!r}\n")


_DK = re.compile(r"#\s*d=(\d+)\s+k=(\d+)")


def read_forest_tsv(path) -> Forest:
    d, edges = None, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                match = _DK.match(line)
                if match:
                    d = int(match.group(1))
                continue
            if not line.strip():
                continue
            i, j, w = line.split("\t")
            edges.append((int(i), int(j), float(w)))
    if d is None:
        raise DataError(f"{path}: missing '# d=<d> k=<k>' line")
    return Forest(d, edges)


def write_json(path, payload, header_line: str = ""):
    if header_line:
        payload = {"_header": header_line.lstrip("# "), **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
