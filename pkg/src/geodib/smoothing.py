"""Gaussian smoothing of point data into a tabulated joint p(i, x)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .data import PointSet
from .info import mutual_information

DEFAULT_BINS = 32
PAD_WIDTHS = 3.0
# smallest exponent (after shifting the row maximum to zero) kept before normalizing
EXP_FLOOR = -700.0


@dataclass(frozen=True)
class Grid:
    edges: tuple[np.ndarray, ...]

    def __post_init__(self):
        edges = tuple(np.asarray(e, dtype=float) for e in self.edges)
        for e in edges:
            if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
                raise ValueError("grid edges must be strictly increasing with at least one bin")
            e.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def dim(self) -> int:
        return len(self.edges)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(e.size - 1 for e in self.edges)

    @property
    def m(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def axis_centers(self) -> tuple[np.ndarray, ...]:
        return tuple((e[:-1] + e[1:]) / 2 for e in self.edges)

    @cached_property
    def centers(self) -> np.ndarray:
        """(M, d) cell centres; flattening is row-major, last axis fastest."""
        mesh = np.meshgrid(*self.axis_centers, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.ones(pts.shape[0], dtype=bool)
        for j, e in enumerate(self.edges):
            inside &= (pts[:, j] >= e[0]) & (pts[:, j] <= e[-1])
        return inside

    def cell_index(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        if not np.all(self.contains(pts)):
            raise ValueError("point outside the grid")
        idx = []
        for j, e in enumerate(self.edges):
            k = np.searchsorted(e, pts[:, j], side="right") - 1
            idx.append(np.clip(k, 0, e.size - 2))
        return np.ravel_multi_index(tuple(idx), self.shape)

    @property
    def bounds(self) -> np.ndarray:
        return np.array([[e[0], e[-1]] for e in self.edges])


def build_grid(points: PointSet, s: float, bins_per_dim: int = DEFAULT_BINS) -> Grid:
    """Uniform grid over the data bounding box padded by ``3 s`` per side."""
    if not s > 0:
        raise ValueError("smoothing scale must be positive")
    if bins_per_dim < 2:
        raise ValueError("need at least 2 bins per dimension")
    pts = points.points
    lo = pts.min(axis=0) - PAD_WIDTHS * s
    hi = pts.max(axis=0) + PAD_WIDTHS * s
    return Grid(tuple(np.linspace(a, b, bins_per_dim + 1) for a, b in zip(lo, hi)))


@dataclass(frozen=True)
class JointDistribution:
    """p(i, x) = p(x|i) p(i) with rows of ``conditional`` holding p(x|i)."""

    conditional: np.ndarray
    grid: Grid
    s: float | None = None

    def __post_init__(self):
        cond = np.asarray(self.conditional, dtype=float)
        if cond.ndim != 2 or cond.shape[1] != self.grid.m:
            raise ValueError("conditional table must be N x M")
        if np.any(cond < 0):
            raise ValueError("conditional table has negative entries")
        cond.setflags(write=False)
        object.__setattr__(self, "conditional", cond)

    @property
    def n(self) -> int:
        return self.conditional.shape[0]

    @property
    def m(self) -> int:
        return self.conditional.shape[1]

    @property
    def marginal(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    @cached_property
    def table(self) -> np.ndarray:
        return self.conditional / self.n

    @cached_property
    def p_x(self) -> np.ndarray:
        return self.conditional.mean(axis=0)

    @cached_property
    def info_ix(self) -> float:
        return mutual_information(self.table)


def gaussian_rows(centers: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    """Normalised isotropic Gaussian weights of each centre on the grid cells."""
    if not s > 0:
        raise ValueError("smoothing scale must be positive; use delta_joint for s = 0")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    sq = np.zeros((centers.shape[0], grid.m))
    cell = grid.centers
    for j in range(grid.dim):
        sq += (cell[None, :, j] - centers[:, j, None]) ** 2
    expo = -sq / (2.0 * s * s)
    expo -= expo.max(axis=1, keepdims=True)
    w = np.where(expo < EXP_FLOOR, 0.0, np.exp(expo))
    return w / w.sum(axis=1, keepdims=True)


def smooth_joint(points: PointSet, s: float, grid: Grid | None = None) -> JointDistribution:
    if grid is None:
        grid = build_grid(points, s)
    if not np.all(grid.contains(points.points)):
        raise ValueError("all points must lie inside the grid")
    return JointDistribution(gaussian_rows(points.points, grid, s), grid, s)


def delta_joint(points: PointSet, grid: Grid) -> JointDistribution:
    """Unsmoothed conditionals: each row is one-hot at the point's cell."""
    cells = grid.cell_index(points.points)
    cond = np.zeros((points.n, grid.m))
    cond[np.arange(points.n), cells] = 1.0
    return JointDistribution(cond, grid, None)


def write_joint_csv(joint: JointDistribution, path) -> None:
    """One row per data index, one column per flattened cell, plus the row sum."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i"] + [f"cell{k}" for k in range(joint.m)] + ["row_sum"])
        for i, row in enumerate(joint.conditional):
            w.writerow([i] + [repr(float(v)) for v in row] + [repr(float(row.sum()))])
