"""CSV/JSON writers.  All writes go through a temp file and ``os.replace``."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def matrix_csv(g, op) -> str:
    """Triplets ``row_id,col_id,re,im`` in row-major order."""
    M = op.matrix.tocoo()
    order = np.lexsort((M.col, M.row))
    ids = [g.ids[i] for i in op.ball.vertices]
    buf = io.StringIO()
    buf.write("row_id,col_id,re,im\n")
    for k in order:
        z = complex(M.data[k])
        buf.write(f"{ids[M.row[k]]},{ids[M.col[k]]},{fmt(z.real)},{fmt(z.imag)}\n")
    return buf.getvalue()


def matrix_sidecar(g, op) -> dict:
    return {
        "index_order": [g.ids[i] for i in op.ball.vertices],
        "weights": [float(v) for v in op.weights],
        "center": g.ids[op.ball.center],
        "radius": op.ball.radius,
        "dirichlet": True,
    }


def eigenvalues_csv(values) -> str:
    return "".join(f"{fmt(v)}\n" for v in sorted(values))


def profile_csv(profile) -> str:
    buf = io.StringIO()
    buf.write("n,min_dist,max_dist,margin,stabilized\n")
    for rec in profile.records():
        buf.write(f"{rec['n']},{fmt(rec['min_dist'])},{fmt(rec['max_dist'])},"
                  f"{rec['margin']},{str(rec['stabilized']).lower()}\n")
    return buf.getvalue()


def write_matrix(g, op, path) -> Path:
    """Write the triplet CSV and ``<path>.json`` sidecar; return the sidecar path."""
    path = Path(path)
    atomic_write_text(path, matrix_csv(g, op))
    side = path.with_suffix(path.suffix + ".json")
    atomic_write_text(side, dumps_json(matrix_sidecar(g, op)))
    return side
