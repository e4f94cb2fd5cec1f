"""Synthetic level-set datasets: ellipse curves and ellipsoid surfaces.

Points are drawn uniformly from the unit square/cube, the property is the
rotated quadratic form (noised), and both inputs and property are embedded
into higher-dimensional observation spaces through fixed affine lifts with
orthonormal columns, so distances are preserved and the lift is exactly
invertible by least squares.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError
from .ndmath.rng import (
    STREAM_DATA_NOISE,
    STREAM_DATA_POINTS,
    STREAM_LIFT,
    STREAM_SPLIT,
    substream,
)
from .validation import check_matrix

X_LIFT_DIM = 5
Y_LIFT_DIM = 3

_DEFAULT_AXES = {2: (1.0, 0.5), 3: (1.0, 0.5, 0.75)}


@dataclass
class LevelSetSpec:
    """Geometry and sampling parameters for one synthetic dataset."""

    dim: int = 2
    semi_axes: tuple[float, ...] | None = None
    rotation_deg: float = 45.0
    property_noise_std: float = 0.01
    n_points: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.semi_axes is None:
            self.semi_axes = _DEFAULT_AXES[self.dim]
        self.semi_axes = tuple(float(a) for a in self.semi_axes)
        if len(self.semi_axes) != self.dim:
            raise ConfigError(f"need {self.dim} semi-axes, got {len(self.semi_axes)}")
        if any(a <= 0 for a in self.semi_axes):
            raise ConfigError(f"semi-axes must be strictly positive, got {self.semi_axes}")
        if self.property_noise_std < 0:
            raise ConfigError("property_noise_std must be >= 0")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "semi_axes": list(self.semi_axes),
            "rotation_deg": self.rotation_deg,
            "property_noise_std": self.property_noise_std,
            "n_points": self.n_points,
            "seed": self.seed,
        }


@dataclass
class AffineMap:
    """z = matrix @ x + bias with orthonormal matrix columns."""

    matrix: np.ndarray  # (d_out, d_in)
    bias: np.ndarray    # (d_out,)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.matrix.ndim != 2 or self.bias.shape != (self.matrix.shape[0],):
            raise ShapeError("affine map matrix/bias shapes are inconsistent")
        gram = self.matrix.T @ self.matrix
        if not np.allclose(gram, np.eye(self.matrix.shape[1]), atol=1e-12):
            raise ConfigError("lift matrix columns are not orthonormal")

    @property
    def d_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def d_out(self) -> int:
        return self.matrix.shape[0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.matrix.T + self.bias

    def invert(self, Z: np.ndarray) -> np.ndarray:
        """Least-squares inverse; off-column-space components are discarded."""
        Z = np.asarray(Z, dtype=np.float64)
        return (Z - self.bias) @ np.linalg.pinv(self.matrix).T


@dataclass
class LiftMaps:
    x_map: AffineMap
    y_map: AffineMap
    seed: int

    @classmethod
    def create(cls, seed: int, dim: int) -> "LiftMaps":
        rng = substream(seed, STREAM_LIFT)
        g = rng.normal(size=(X_LIFT_DIM, dim))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))  # canonical column signs
        x_bias = 0.1 * rng.normal(size=X_LIFT_DIM)
        gy = rng.normal(size=(Y_LIFT_DIM, 1))
        qy = gy / np.linalg.norm(gy)
        y_bias = 0.1 * rng.normal(size=Y_LIFT_DIM)
        return cls(AffineMap(q, x_bias), AffineMap(qy, y_bias), seed)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "x_matrix": self.x_map.matrix.tolist(),
            "x_bias": self.x_map.bias.tolist(),
            "y_matrix": self.y_map.matrix.tolist(),
            "y_bias": self.y_map.bias.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LiftMaps":
        return cls(AffineMap(np.array(d["x_matrix"]), np.array(d["x_bias"])),
                   AffineMap(np.array(d["y_matrix"]), np.array(d["y_bias"])),
                   int(d["seed"]))


@dataclass
class Dataset:
    """Lifted observations with the generating originals and split indices."""

    X: np.ndarray           # (n, 5)
    Y: np.ndarray           # (n, 3)
    X_original: np.ndarray  # (n, dim)
    Y_original: np.ndarray  # (n, 1)
    lift: LiftMaps
    spec: LevelSetSpec
    train_idx: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    test_idx: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def __post_init__(self):
        n = self.X.shape[0]
        if not (self.Y.shape[0] == self.X_original.shape[0] == self.Y_original.shape[0] == n):
            raise ShapeError("dataset arrays disagree on row count")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def X_train(self) -> np.ndarray:
        return self.X[self.train_idx]

    @property
    def Y_train(self) -> np.ndarray:
        return self.Y[self.train_idx]

    @property
    def X_test(self) -> np.ndarray:
        return self.X[self.test_idx]

    @property
    def Y_test(self) -> np.ndarray:
        return self.Y[self.test_idx]


def property_value(points, spec: LevelSetSpec):
    """Noiseless level-set property: sum of squared rotated coordinates over axes^2.

    The rotation acts in the X1X2-plane and maps points back into the frame of
    the (rotated) ellipse axes, so e.g. with 45 degrees the point
    (1/sqrt2, 1/sqrt2) lands on the first-axis endpoint.
    """
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != spec.dim:
        raise ShapeError(f"points have {pts.shape[1]} coordinates, spec.dim is {spec.dim}")
    theta = np.deg2rad(spec.rotation_deg)
    c, s = np.cos(theta), np.sin(theta)
    r = pts.copy()
    r[:, 0] = c * pts[:, 0] + s * pts[:, 1]
    r[:, 1] = -s * pts[:, 0] + c * pts[:, 1]
    vals = np.sum(r ** 2 / np.asarray(spec.semi_axes) ** 2, axis=1)
    return float(vals[0]) if single else vals


def generate(spec: LevelSetSpec) -> Dataset:
    """Sample a dataset: uniform points, noised property, fresh seeded lifts."""
    if spec.n_points < 10:
        raise ConfigError(f"n_points must be at least 10, got {spec.n_points}")
    n = spec.n_points
    X_original = substream(spec.seed, STREAM_DATA_POINTS).uniform(-1.0, 1.0, size=(n, spec.dim))
    y = property_value(X_original, spec)
    if spec.property_noise_std > 0:
        y = y + substream(spec.seed, STREAM_DATA_NOISE).normal(0.0, spec.property_noise_std, size=n)
    Y_original = y.reshape(-1, 1)

    lift = LiftMaps.create(spec.seed, spec.dim)
    X = lift.x_map.apply(X_original)
    Y = lift.y_map.apply(Y_original)

    perm = substream(spec.seed, STREAM_SPLIT).permutation(n)
    n_test = max(1, n // 10)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return Dataset(X, Y, X_original, Y_original, lift, spec, train_idx, test_idx)


def unlift(points, lift: LiftMaps) -> np.ndarray:
    """Project lifted 5-dim inputs back to the original coordinates."""
    pts = check_matrix(points, "points", n_cols=lift.x_map.d_out)
    return lift.x_map.invert(pts)


def unlift_y(values, lift: LiftMaps) -> np.ndarray:
    """Project lifted 3-dim property vectors back to scalars."""
    vals = check_matrix(values, "values", n_cols=lift.y_map.d_out)
    return lift.y_map.invert(vals)


def save_dataset(ds: Dataset, path) -> tuple[Path, Path]:
    """Write `<path>.csv` (data) and `<path>.json` (spec, lift, split)."""
    stem = Path(path)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    header = ([f"x{i}" for i in range(X_LIFT_DIM)] + [f"y{i}" for i in range(Y_LIFT_DIM)]
              + [f"xo{i}" for i in range(ds.spec.dim)] + ["yo0"])
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        block = np.hstack([ds.X, ds.Y, ds.X_original, ds.Y_original])
        for row in block:
            writer.writerow([f"{v:.17g}" for v in row])

    sidecar = {
        "spec": ds.spec.to_dict(),
        "lift": ds.lift.to_dict(),
        "split": {"train": ds.train_idx.tolist(), "test": ds.test_idx.tolist()},
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")
    return csv_path, json_path


def load_dataset(path) -> Dataset:
    stem = Path(path)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    with open(json_path) as fh:
        sidecar = json.load(fh)
    spec = LevelSetSpec(**sidecar["spec"])
    lift = LiftMaps.from_dict(sidecar["lift"])

    raw = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    d = spec.dim
    X = raw[:, :X_LIFT_DIM]
    Y = raw[:, X_LIFT_DIM:X_LIFT_DIM + Y_LIFT_DIM]
    X_original = raw[:, X_LIFT_DIM + Y_LIFT_DIM:X_LIFT_DIM + Y_LIFT_DIM + d]
    Y_original = raw[:, X_LIFT_DIM + Y_LIFT_DIM + d:]
    return Dataset(X, Y, X_original, Y_original, lift, spec,
                   np.array(sidecar["split"]["train"], dtype=int),
                   np.array(sidecar["split"]["test"], dtype=int))
