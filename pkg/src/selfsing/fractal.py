"""Generalized Cantor sets built from m of the k^3 sub-cubes of the unit cube."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 10 ** 6


class CapExceeded(ValueError):
    pass


class FlatCloudError(ValueError):
    pass


def default_cells(k: int, m: int) -> tuple[tuple[int, int, int], ...]:
    """Deterministic cell choice.

    Eight cells go to the cube corners ``{0, k-1}^3``. Otherwise cells with
    even indices are taken in lexicographic order (they never touch), and
    any remainder is filled lexicographically from the rest.
    """
    if not 1 <= m <= k ** 3:
        raise ValueError(f"need 1 <= m <= k^3, got k={k}, m={m}")
    if m == 8 and k >= 3:
        return tuple(itertools.product((0, k - 1), repeat=3))
    even = [c for c in itertools.product(range(k), repeat=3) if all(v % 2 == 0 for v in c)]
    if m <= len(even):
        return tuple(even[:m])
    chosen = set(even)
    rest = [c for c in itertools.product(range(k), repeat=3) if c not in chosen]
    return tuple(even + rest[: m - len(even)])


@dataclass(frozen=True)
class CantorSpec:
    k: int
    cells: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        cells = tuple(tuple(int(v) for v in c) for c in self.cells)
        object.__setattr__(self, "cells", cells)
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not cells:
            raise ValueError("at least one cell is required")
        if len(set(cells)) != len(cells):
            raise ValueError("cells must be pairwise distinct")
        for c in cells:
            if len(c) != 3 or not all(0 <= v < self.k for v in c):
                raise ValueError(f"cell {c} is not in {{0..{self.k - 1}}}^3")

    @classmethod
    def default(cls, k: int, m: int) -> "CantorSpec":
        return cls(k, default_cells(k, m))

    @property
    def m(self) -> int:
        return len(self.cells)

    @property
    def generator_points(self) -> np.ndarray:
        return np.asarray(self.cells, dtype=float) / self.k

    def separated(self) -> bool:
        """True when no two chosen cells touch (Chebyshev distance >= 2)."""
        c = np.asarray(self.cells)
        if len(c) < 2:
            return True
        d = np.abs(c[:, None, :] - c[None, :, :]).max(axis=2)
        np.fill_diagonal(d, 2)
        return bool(d.min() >= 2)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    depth: int
    spec: CantorSpec | None = None

    def __len__(self):
        return len(self.points)


def beta_map(spec: CantorSpec, i: int, x) -> np.ndarray:
    """The expanding branch ``x -> k (x - x_i)``; ``i`` counts from 1."""
    if not 1 <= i <= spec.m:
        raise IndexError(f"branch index {i} outside 1..{spec.m}")
    return spec.k * (np.asarray(x, dtype=float) - spec.generator_points[i - 1])


def ifs_step(spec: CantorSpec, points: np.ndarray) -> np.ndarray:
    """Union over branches of ``x_i + points / k``, branch-major order."""
    g = spec.generator_points
    return (g[:, None, :] + np.asarray(points)[None, :, :] / spec.k).reshape(-1, 3)


def generation(spec: CantorSpec, N: int, cap: int = DEFAULT_CAP) -> PointCloud:
    """All points mapped to the origin by some N-fold composition of branches."""
    if N < 0:
        raise ValueError("N must be non-negative")
    size = spec.m ** N
    if size > cap:
        raise CapExceeded(f"generation {N} has {size} points; raise cap to at least {size}")
    pts = np.zeros((1, 3))
    for _ in range(N):
        pts = ifs_step(spec, pts)
    return PointCloud(pts, N, spec)


def chain_point(spec: CantorSpec, branches) -> np.ndarray:
    """The point ``x_{i_1} + x_{i_2}/k + ...`` of A_N for 1-based ``branches``."""
    g = spec.generator_points
    x = np.zeros(3)
    for depth, i in enumerate(branches):
        x = x + g[i - 1] / spec.k ** depth
    return x


def limit_set_sample(spec: CantorSpec, depth: int, cap: int = DEFAULT_CAP) -> PointCloud:
    """Depth-``depth`` generation; within ``sqrt(3) k^-depth`` of the limit set."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    return generation(spec, depth, cap)


def cell_digits(points, k: int, level: int) -> np.ndarray:
    """Integer cell address of each point at refinement ``level`` (1-based)."""
    scaled = np.floor(np.asarray(points) * k ** level + 1e-9)
    return (scaled.astype(np.int64) % k) if level >= 1 else scaled.astype(np.int64)


def box_counting_dimension(cloud, scales) -> float:
    """Slope of log(box count) against log(1/scale), boxes anchored at 0."""
    pts = np.asarray(getattr(cloud, "points", cloud), dtype=float)
    scales = np.asarray(scales, dtype=float)
    if pts.size == 0:
        raise ValueError("empty point cloud")
    if len(scales) < 3 or np.any(np.diff(scales) >= 0) or np.any((scales <= 0) | (scales >= 1)):
        raise ValueError("need at least 3 decreasing scales in (0, 1)")
    counts = []
    for s in scales:
        boxes = np.floor(pts / s + 1e-9).astype(np.int64)
        counts.append(len(np.unique(boxes, axis=0)))
    counts = np.asarray(counts, dtype=float)
    if np.all(counts == counts[0]):
        if counts[0] == 1:
            return 0.0
        raise FlatCloudError(f"box counts are constant ({int(counts[0])}); slope undefined")
    slope, _ = np.polyfit(np.log(1.0 / scales), np.log(counts), 1)
    return float(slope)
