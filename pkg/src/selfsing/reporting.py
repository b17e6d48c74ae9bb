"""Grid sampling and deterministic file formats.

Binary grid layout (``SSGRID01``), all little-endian::

    offset  type              content
    0       8 bytes           magic b"SSGRID01"
    8       uint32            ndim
    12      uint32            ncomp (value columns per grid point)
    16      uint64[ndim]      dims (points per axis)
    ..      float64[ndim, 2]  bounds (lo, hi) per axis
    ..      float64           t
    ..      float64[...]      values, shape dims + (ncomp,), row-major

Row-major means the last axis varies fastest and the component index
fastest of all, which is the same order as the CSV rows. CSV columns are
``x1, x2, x3`` followed by one column per value name.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import AXISYM, POST_T, FieldSpec

MAGIC = b"SSGRID01"
DEFAULT_GRID_CAP = 2_000_000
SCALAR_FIELDS = ("z", "f", "grad_norm")


class GridCapExceeded(ValueError):
    pass


# ------------------------------------------------------------------ JSON


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if hasattr(v, "as_dict"):
        return _jsonable(v.as_dict())
    return v


def dumps_json(obj) -> str:
    """Canonical JSON: sorted keys, fixed indent, non-finite floats as strings."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form of a flat config mapping."""
    return hashlib.sha256(dumps_json(config).encode("utf-8")).hexdigest()


def write_sidecar(path, cfg_hash: str, **meta) -> Path:
    """``<file>.meta.json`` next to ``path``."""
    path = Path(path)
    side = path.with_name(path.name + ".meta.json")
    write_json(side, {"file": path.name, "config_hash": cfg_hash, **meta})
    return side


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_point_cloud(path, points) -> Path:
    """Columns ``x,y,z`` in the order of ``points``."""
    return write_csv(path, ("x", "y", "z"), np.asarray(points, dtype=float).reshape(-1, 3))


def read_point_cloud(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data.reshape(-1, 3)


# ------------------------------------------------------------------ grids


@dataclass(frozen=True)
class GridDescriptor:
    """Regular grid: ``dims[i]`` points spaced evenly over ``bounds[i]``, ends included."""

    dims: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "bounds", bounds)
        if len(dims) != len(bounds) or not dims:
            raise ValueError("dims and bounds must have the same non-zero length")
        if any(d < 1 for d in dims):
            raise ValueError("every axis needs at least one point")
        for a, b in bounds:
            if not (math.isfinite(a) and math.isfinite(b)) or b < a:
                raise ValueError(f"bad axis bounds ({a}, {b})")

    @classmethod
    def cube(cls, n, half_width: float, ndim: int = 3) -> "GridDescriptor":
        dims = (n,) * ndim if isinstance(n, int) else tuple(n)
        return cls(dims, ((-half_width, half_width),) * len(dims))

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, d) if d > 1 else np.array([a])
                for d, (a, b) in zip(self.dims, self.bounds)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class GridDump:
    grid: GridDescriptor
    t: float
    names: tuple[str, ...]
    values: np.ndarray  # (size, ncomp)

    @property
    def ncomp(self) -> int:
        return len(self.names)

    def array(self) -> np.ndarray:
        return self.values.reshape(self.grid.dims + (self.ncomp,))

    def header(self) -> list[str]:
        return [f"x{i + 1}" for i in range(len(self.grid.dims))] + list(self.names)

    def to_csv(self, path) -> Path:
        pts = self.grid.points()
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(",".join(self.header()) + "\n")
            np.savetxt(fh, np.hstack([pts, self.values]), fmt="%.17g", delimiter=",")
        return path

    def to_binary(self, path) -> Path:
        g = self.grid
        head = MAGIC + struct.pack(f"<II{len(g.dims)}Q", len(g.dims), self.ncomp, *g.dims)
        head += struct.pack(f"<{2 * len(g.dims)}d", *[v for ab in g.bounds for v in ab])
        head += struct.pack("<d", self.t)
        path = Path(path)
        with path.open("wb") as fh:
            fh.write(head)
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return path

    @classmethod
    def from_binary(cls, path, names=None) -> "GridDump":
        raw = Path(path).read_bytes()
        if raw[:8] != MAGIC:
            raise ValueError("not an SSGRID01 file")
        ndim, ncomp = struct.unpack_from("<II", raw, 8)
        off = 16
        dims = struct.unpack_from(f"<{ndim}Q", raw, off)
        off += 8 * ndim
        flat = struct.unpack_from(f"<{2 * ndim}d", raw, off)
        off += 16 * ndim
        (t,) = struct.unpack_from("<d", raw, off)
        off += 8
        vals = np.frombuffer(raw, dtype="<f8", offset=off).astype(float)
        grid = GridDescriptor(dims, tuple(zip(flat[::2], flat[1::2])))
        if vals.size != grid.size * ncomp:
            raise ValueError("truncated SSGRID01 payload")
        names = tuple(names) if names else tuple(f"c{i}" for i in range(ncomp))
        return cls(grid, t, names, vals.reshape(grid.size, ncomp))


def _check_cap(grid: GridDescriptor, cap: int):
    if grid.size > cap:
        raise GridCapExceeded(f"grid has {grid.size} points, above the cap of {cap}")


def sample_grid(spec: FieldSpec, t: float, grid: GridDescriptor, fields=("z",),
                cap: int = DEFAULT_GRID_CAP) -> GridDump:
    """Evaluate scalar fields at fixed ``t`` on a 3-D Cartesian grid.

    ``fields`` picks from ``z``, ``f`` (total forcing) and ``grad_norm``.
    Axisymmetric specs are evaluated through the lifted (Cartesian) path.
    """
    if len(grid.dims) != 3:
        raise ValueError("field grids are three-dimensional")
    bad = [f for f in fields if f not in SCALAR_FIELDS]
    if bad or not fields:
        raise ValueError(f"fields must be drawn from {SCALAR_FIELDS}, got {tuple(fields)}")
    _check_cap(grid, cap)
    pts = grid.points()
    cols = []
    for name in fields:
        if name == "z":
            cols.append(spec.eval_Z_lifted(t, pts) if spec.variant == AXISYM else spec.eval_z(t, pts))
        elif name == "f":
            cols.append(spec.eval_f(t, pts, total=True))
        else:
            cols.append(np.linalg.norm(spec.eval_grad_z(t, pts), axis=-1))
    return GridDump(grid, float(t), tuple(fields), np.column_stack(cols))


def sample_vector_grid(lifted, t: float, grid: GridDescriptor, forcing: bool = False,
                       cap: int = DEFAULT_GRID_CAP) -> GridDump:
    """Three value columns from a :class:`~selfsing.lift.LiftedField`."""
    if len(grid.dims) != 3:
        raise ValueError("field grids are three-dimensional")
    _check_cap(grid, cap)
    pts = grid.points()
    vals = lifted.eval_f(t, pts) if forcing else lifted.eval_z(t, pts)
    stem = "f" if forcing else "z"
    return GridDump(grid, float(t), (f"{stem}1", f"{stem}2", f"{stem}3"), vals.reshape(-1, 3))


def level_of(spec: FieldSpec, t: float):
    """Interval index for the metadata sidecar; ``None`` once ``t >= T``."""
    N = spec.level(t)
    return None if N is POST_T else int(N)
