"""JSON and CSV serialization for states, channels and reports.

State file::

    {"dimA": 2, "dimB": 2, "matrix": [[re, im], ...]}     # row-major, (dA*dB)^2 pairs

Channel file::

    {"dimIn": 2, "dimOut": 2, "kraus": [[[re, im], ...], ...]}   # each dimOut x dimIn, row-major
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .channels import KrausChannel
from .core import DensityMatrix
from .exceptions import InvalidState


def fmt(x):
    """15 significant digits, '.' decimal separator, no negative zero."""
    x = float(x) + 0.0
    if x == 0.0:
        return "0"
    return format(x, ".15g")


def write_csv(path_or_file, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    _write_text(path_or_file, text)


def dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path_or_file, obj):
    _write_text(path_or_file, dumps(obj))


def _write_text(path_or_file, text):
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
        return
    with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


# --------------------------------------------------------------------------
# matrices
# --------------------------------------------------------------------------


def matrix_to_pairs(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in m.ravel()]


def pairs_to_matrix(pairs, rows=None, cols=None, what="matrix"):
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidState(f"{what}: entries must be [re, im] pairs ({exc})") from None
    if arr.ndim == 3 and arr.shape[-1] == 2:  # nested rows of pairs
        arr = arr.reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidState(f"{what}: entries must be [re, im] pairs, got array of shape {arr.shape}")
    z = arr[:, 0] + 1j * arr[:, 1]
    if rows is None:
        n = int(round(math.sqrt(z.size)))
        if n * n != z.size:
            raise InvalidState(f"{what}: {z.size} entries do not form a square matrix")
        rows = cols = n
    if z.size != rows * cols:
        raise InvalidState(f"{what}: entries length {z.size} != rows*cols = {rows * cols}")
    if not np.all(np.isfinite(z)):
        raise InvalidState(f"{what}: non-finite entries")
    return z.reshape(rows, cols)


def state_to_json(rho):
    return {"dimA": rho.dim_a, "dimB": rho.dim_b, "matrix": matrix_to_pairs(rho.mat)}


def state_from_json(obj):
    try:
        da, db = int(obj["dimA"]), int(obj["dimB"])
        pairs = obj["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState(f"state file needs dimA, dimB and matrix ({exc})") from None
    d = da * db
    return DensityMatrix(da, db, pairs_to_matrix(pairs, d, d, "state matrix"))


def channel_to_json(channel):
    return {
        "dimIn": channel.dim_in,
        "dimOut": channel.dim_out,
        "kraus": [matrix_to_pairs(k) for k in channel.ops],
    }


def channel_from_json(obj):
    try:
        din, dout = int(obj["dimIn"]), int(obj["dimOut"])
        ops = obj["kraus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState(f"channel file needs dimIn, dimOut and kraus ({exc})") from None
    mats = [pairs_to_matrix(k, dout, din, f"Kraus operator {i}") for i, k in enumerate(ops)]
    if not mats:
        raise InvalidState("channel file has no Kraus operators")
    return KrausChannel(np.stack(mats))


def load_json(path):
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)
