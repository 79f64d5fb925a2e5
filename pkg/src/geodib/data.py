"""Synthetic Gaussian-mixture point sets and CSV point files."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class PointFileError(ValueError):
    """Raised for unreadable or malformed point files."""


@dataclass(frozen=True)
class GaussianComponent:
    mean: np.ndarray
    covariance: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"covariance shape {cov.shape} does not match mean dimension {d}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive-definite") from None
        if not self.weight > 0:
            raise ValueError("component weight must be positive")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple[GaussianComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("all components must share a dimension")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        w = np.array([c.weight for c in self.components])
        return w / w.sum()

    @property
    def dim(self) -> int:
        return self.components[0].dim


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    labels: np.ndarray | None = None
    spec: MixtureSpec | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("a point set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must have one entry per point")
            if lab.min() < 0:
                raise ValueError("labels must be non-negative")
            if self.spec is not None and lab.max() >= len(self.spec.components):
                raise ValueError("label does not index a mixture component")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        if not np.array_equal(self.points, other.points):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None


def isotropic(mean, var=1.0, weight=1.0) -> GaussianComponent:
    mean = np.asarray(mean, dtype=float)
    return GaussianComponent(mean, var * np.eye(mean.shape[0]), weight)


def sample_mixture(spec: MixtureSpec, n: int, seed: int) -> PointSet:
    """Draw ``n`` labelled points from ``spec``; identical for identical arguments."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.choice(len(spec.components), size=n, p=spec.weights)
    z = rng.standard_normal((n, spec.dim))
    points = np.empty((n, spec.dim))
    for k, comp in enumerate(spec.components):
        idx = labels == k
        chol = np.linalg.cholesky(comp.covariance)
        points[idx] = comp.mean + z[idx] @ chol.T
    return PointSet(points, labels, spec)


def _rotated_cov(eigvals, angle):
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ np.diag(eigvals) @ rot.T
    return (cov + cov.T) / 2


def _triangle(side):
    h = side * np.sqrt(3) / 2
    return [(0.0, 0.0), (side, 0.0), (side / 2, h)]


# name -> (component means/covariances, N); all components equally weighted
PRESETS = {
    "three_equal": ([isotropic(m) for m in _triangle(8.0)], 150),
    "three_unequal": ([isotropic(m) for m in [(0, 0), (7, 0), (22, 0)]], 150),
    "five_multiscale": (
        [isotropic(m) for m in [(0, 0), (7, 0), (22, 0), (22, 15), (0, 15)]],
        250,
    ),
    "single_blob": ([isotropic((0, 0))], 100),
    "symmetric_plus_skew": (
        [
            isotropic((0, 0)),
            GaussianComponent(np.array([8.0, 0.0]), _rotated_cov([4.0, 1.0], np.pi / 4)),
        ],
        1000,
    ),
}


def preset_spec(name: str) -> tuple[MixtureSpec, int]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    comps, n = PRESETS[name]
    return MixtureSpec(tuple(comps)), n


def preset_dataset(name: str, seed: int = 0) -> PointSet:
    spec, n = preset_spec(name)
    return sample_mixture(spec, n, seed)


def save_points(points: PointSet, path) -> None:
    path = Path(path)
    header = [f"x{j + 1}" for j in range(points.dim)]
    if points.labels is not None:
        header.append("label")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, row in enumerate(points.points):
            vals = [repr(float(v)) for v in row]
            if points.labels is not None:
                vals.append(str(int(points.labels[i])))
            w.writerow(vals)


def load_points(path) -> PointSet:
    """Read a CSV point file (header ``x1,x2[,label]``)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(ln, r) for ln, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise PointFileError(f"{path}: no points")
    ln0, header = rows[0]
    header = [h.strip() for h in header]
    has_label = header[-1] == "label"
    if has_label:
        header = header[:-1]
    if not header or header != [f"x{j + 1}" for j in range(len(header))]:
        raise PointFileError(f"{path}: line {ln0}: expected header x1,x2[,label], got {','.join(header)}")
    d = len(header)
    width = d + has_label
    coords, labels = [], []
    for ln, row in rows[1:]:
        if len(row) != width:
            raise PointFileError(f"{path}: line {ln}: expected {width} fields, got {len(row)}")
        try:
            coords.append([float(v) for v in row[:d]])
            if has_label:
                labels.append(int(row[d]))
        except ValueError as exc:
            raise PointFileError(f"{path}: line {ln}: {exc}") from None
    if not coords:
        raise PointFileError(f"{path}: no points")
    try:
        return PointSet(np.array(coords), np.array(labels) if has_label else None)
    except ValueError as exc:
        raise PointFileError(f"{path}: {exc}") from None
