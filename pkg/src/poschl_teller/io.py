"""Deterministic CSV/JSON writers and the binary kernel dump used as a cache.

Binary kernel layout (all little-endian):

    8 bytes   magic b"PTKERNL1"
    int32     band j
    float64   x_min
    float64   x_max
    int64     n_points
    int32     1 if a derivative matrix follows, else 0
    n²·16 B   K as interleaved (re, im) float64, row-major
    n²·16 B   ∂_x K (only when flagged)
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError
from .numerics import Grid
from .spectral import MultiplierKernel

MAGIC = b"PTKERNL1"
_HEADER = struct.Struct("<8sidd q i")


def fmt(value) -> str:
    """Round-trippable, locale-free float formatting."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return path


def write_kernel_csv(kernel: MultiplierKernel, path, stride: int = 1, derivative: bool = False) -> Path:
    """Long-format kernel table with columns x, y, re, im (every ``stride``-th node)."""
    if stride < 1:
        raise InvalidParameterError("stride must be >= 1")
    mat = kernel.dmatrix if derivative else kernel.matrix
    if mat is None:
        raise InvalidParameterError("kernel has no derivative matrix")
    x = kernel.grid.points
    idx = np.arange(0, x.size, stride)
    sub = mat[np.ix_(idx, idx)]

    def rows():
        for a, i in enumerate(idx):
            for b, l in enumerate(idx):
                z = sub[a, b]
                yield (x[i], x[l], z.real, z.imag)

    return write_csv(path, ("x", "y", "re", "im"), rows())


def write_kernel_binary(kernel: MultiplierKernel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = kernel.grid
    has_d = kernel.dmatrix is not None
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, int(kernel.band), g.x_min, g.x_max, g.n_points, int(has_d)))
        fh.write(np.ascontiguousarray(kernel.matrix, dtype="<c16").tobytes())
        if has_d:
            fh.write(np.ascontiguousarray(kernel.dmatrix, dtype="<c16").tobytes())
    return path


@dataclass(frozen=True)
class KernelHeader:
    band: int
    grid: Grid
    has_derivative: bool


def read_kernel_header(path) -> KernelHeader:
    with Path(path).open("rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise InvalidParameterError(f"{path}: truncated kernel header")
    magic, band, x_min, x_max, n, has_d = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise InvalidParameterError(f"{path}: not a kernel dump")
    return KernelHeader(band, Grid(x_min, x_max, n), bool(has_d))


def read_kernel_binary(path) -> MultiplierKernel:
    """Continuum kernel (and derivative) from a dump; the bound-state part is not stored."""
    head = read_kernel_header(path)
    n = head.grid.n_points
    count = n * n
    data = np.fromfile(path, dtype="<c16", offset=_HEADER.size)
    expected = count * (2 if head.has_derivative else 1)
    if data.size != expected:
        raise InvalidParameterError(f"{path}: expected {expected} entries, found {data.size}")
    K = data[:count].astype(complex).reshape(n, n)
    dK = data[count:].astype(complex).reshape(n, n) if head.has_derivative else None
    return MultiplierKernel(head.band, head.grid, K, dK)


def write_band_csv(bands, path) -> Path:
    """Columns x, band{j}_re, band{j}_im for every band j."""
    header = ["x"]
    for j in bands.indices:
        header += [f"band{j}_re", f"band{j}_im"]
    x = bands.grid.points
    vals = bands.values

    def rows():
        for i in range(x.size):
            row = [x[i]]
            for b in vals[:, i]:
                row += [b.real, b.imag]
            yield row

    return write_csv(path, header, rows())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def check_record(check_id: str, anchor: str, value, threshold, passed: bool, extra: Optional[dict] = None) -> dict:
    """Report record {check_id, paper_anchor, value, threshold, pass} (plus optional details)."""
    rec = {"check_id": check_id, "paper_anchor": anchor, "value": value, "threshold": threshold, "pass": bool(passed)}
    if extra:
        rec["details"] = extra
    return rec
