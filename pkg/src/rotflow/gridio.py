"""Raw grid dump format.

One ASCII header line

    nx ny x0 y0 dx dy field-name

followed by nx*ny little-endian 64-bit floats in row-major (C) order, where
``values[i, j]`` is the field at (x0 + i*dx, y0 + j*dy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridMeta:
    nx: int
    ny: int
    x0: float
    y0: float
    dx: float
    dy: float
    name: str


def write_grid(path, values: np.ndarray, x0: float, y0: float,
               dx: float, dy: float, name: str) -> None:
    values = np.asarray(values, dtype="<f8")
    if values.ndim != 2:
        raise ValueError("grid dump expects a 2D array")
    if any(ch.isspace() for ch in name) or not name:
        raise ValueError("field-name must be nonempty without whitespace")
    x0, y0, dx, dy = float(x0), float(y0), float(dx), float(dy)
    header = f"{values.shape[0]} {values.shape[1]} {x0!r} {y0!r} {dx!r} {dy!r} {name}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(values).tobytes())


def read_grid(path):
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        parts = header.split()
        if len(parts) != 7:
            raise ValueError(f"{path}: malformed grid header {header!r}")
        nx, ny = int(parts[0]), int(parts[1])
        x0, y0, dx, dy = (float(p) for p in parts[2:6])
        name = parts[6]
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, found {data.size}")
    values = data.reshape(nx, ny).astype(float)
    return values, GridMeta(nx, ny, x0, y0, dx, dy, name)
