"""Quantitative evaluation of trained models.

Scoring always encodes with means only (no sampling noise): the reported
errors are point estimates, and generation noise belongs to training. The
invariance protocol mirrors training's fixed-property sampling: encode a
reference, pin its property block, sample the invariant block uniformly
within one standard deviation of the test-set encodings, decode, re-encode,
and compare the re-predicted property against the reference prediction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, unlift, unlift_y
from .errors import ConfigError, ShapeError
from .ndmath.rng import STREAM_EVAL, substream
from .validation import check_matrix


@dataclass
class EvalReport:
    mae_x: float
    mae_y: float
    invariance_mae: float
    sigma_signal: np.ndarray
    sigma_noise: np.ndarray
    selected_dims: np.ndarray
    n_references: int
    n_samples_per_reference: int
    d_z0: int

    def to_dict(self) -> dict:
        return {
            "mae_x": self.mae_x,
            "mae_y": self.mae_y,
            "invariance_mae": self.invariance_mae,
            "sigma_signal": [float(v) for v in self.sigma_signal],
            "sigma_noise": [float(v) for v in self.sigma_noise],
            "selected_dims": [bool(v) for v in self.selected_dims],
            "n_references": self.n_references,
            "n_samples_per_reference": self.n_samples_per_reference,
            "d_z0": self.d_z0,
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")
        return path


@dataclass
class TraversalSpec:
    """Grid description for a latent traversal export."""

    z0_dim: int | None = None          # None -> highest signal/noise in Z0
    z0_values: list | None = None      # None -> 10 equidistant over observed range
    z1_dims: list | None = None        # None -> the top selected Z1 dimension(s)
    steps: int = 25
    extend: bool = False               # sweep mean +/- 2 std instead of observed range
    output: str | None = None


def reconstruction_maes(model, X: np.ndarray, Y: np.ndarray) -> tuple[float, float]:
    """Mean absolute reconstruction/prediction errors with deterministic encoding."""
    X = check_matrix(X, "X")
    Y = check_matrix(Y, "Y")
    mu = check_matrix(model.encode_mean(X), "encoder means")
    d_z0 = model.config.d_z0
    y_hat = model.predict_y(mu[:, :d_z0])
    x_hat = model.decode_input(mu[:, d_z0:], y_hat)
    return float(np.mean(np.abs(X - x_hat))), float(np.mean(np.abs(Y - y_hat)))


def sparsity_report(model, test_X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-dimension signal (std of encoder means) vs sampling noise scale.

    A dimension is selected when its signal exceeds the noise.
    """
    test_X = check_matrix(test_X, "test_X", min_rows=2)
    mu = check_matrix(model.encode_mean(test_X), "encoder means")
    sigma_signal = mu.std(axis=0, ddof=1)
    sigma_noise = np.asarray(model.noise_std(), dtype=np.float64)
    if sigma_noise.shape != sigma_signal.shape:
        raise ShapeError("noise scale length does not match the latent width")
    return sigma_signal, sigma_noise, sigma_signal > sigma_noise


def invariance_details(model, test_X: np.ndarray, n_samples: int = 400,
                       n_references: int = 25, seed: int = 0) -> dict:
    """Fixed-property sampling protocol, keeping per-sample deviations.

    Returns the invariance MAE plus the spread and count of the per-sample
    absolute deviations, so callers can build standard-error bounds.
    """
    if n_samples <= 0:
        raise ConfigError(f"n_samples must be positive, got {n_samples}")
    if n_references <= 0:
        raise ConfigError(f"n_references must be positive, got {n_references}")
    test_X = check_matrix(test_X, "test_X")
    mu = check_matrix(model.encode_mean(test_X), "encoder means")
    d_z0 = model.config.d_z0

    z1_means = mu[:, d_z0:]
    center = z1_means.mean(axis=0)
    spread = z1_means.std(axis=0)

    rng = substream(seed, STREAM_EVAL)
    if n_references >= len(test_X):
        refs = np.arange(len(test_X))
    else:
        refs = np.sort(rng.choice(len(test_X), size=n_references, replace=False))

    deviations = []
    for idx in refs:
        z0_ref = mu[idx, :d_z0][None, :]
        y_ref = model.predict_y(z0_ref)
        z1_draws = rng.uniform(center - spread, center + spread,
                               size=(n_samples, z1_means.shape[1]))
        x_gen = model.decode_input(z1_draws, np.tile(y_ref, (n_samples, 1)))
        mu_gen = check_matrix(model.encode_mean(x_gen), "re-encoded means")
        y_re = model.predict_y(mu_gen[:, :d_z0])
        deviations.append(np.mean(np.abs(y_ref - y_re), axis=1))
    dev = np.concatenate(deviations)
    return {
        "invariance_mae": float(dev.mean()),
        "deviation_std": float(dev.std(ddof=1)) if dev.size > 1 else 0.0,
        "n_deviations": int(dev.size),
        "n_references": int(len(refs)),
    }


def invariance_mae(model, test_X: np.ndarray, n_samples: int = 400,
                   n_references: int = 25, seed: int = 0) -> float:
    """Mean absolute deviation of re-predicted properties under fixed-property
    sampling in the invariant block."""
    return invariance_details(model, test_X, n_samples=n_samples,
                              n_references=n_references, seed=seed)["invariance_mae"]


def _resolve_sweep_dims(model, test_X: np.ndarray, spec: TraversalSpec):
    sigma_signal, sigma_noise, _selected = sparsity_report(model, test_X)
    snr = sigma_signal / sigma_noise
    d_z0 = model.config.d_z0
    z0_dim = spec.z0_dim if spec.z0_dim is not None else int(np.argmax(snr[:d_z0]))
    if not 0 <= z0_dim < d_z0:
        raise ConfigError(f"z0_dim {z0_dim} outside the property block [0, {d_z0})")
    if spec.z1_dims is not None:
        z1_dims = [int(d) for d in spec.z1_dims]
    else:
        z1_dims = [int(np.argmax(snr[d_z0:]))]
    for d in z1_dims:
        if not 0 <= d < model.config.d_z1:
            raise ConfigError(f"z1_dim {d} outside the invariant block [0, {model.config.d_z1})")
    return z0_dim, z1_dims


def traverse(model, dataset: Dataset, spec: TraversalSpec) -> dict:
    """Decode a latent grid and express it in the original data space.

    For every fixed property-block value and every grid point in the swept
    invariant dimensions (non-swept dimensions pinned to their test-set
    means), decodes the input, projects it back through the lift, and
    re-predicts the property through a full pass.
    """
    X_test = dataset.X_test
    mu = check_matrix(model.encode_mean(X_test), "encoder means")
    d_z0 = model.config.d_z0
    z0_dim, z1_dims = _resolve_sweep_dims(model, X_test, spec)

    if spec.z0_values is not None:
        z0_values = np.asarray([float(v) for v in spec.z0_values])
    else:
        lo, hi = mu[:, z0_dim].min(), mu[:, z0_dim].max()
        z0_values = np.linspace(lo, hi, 10)

    grids = []
    for d in z1_dims:
        col = mu[:, d_z0 + d]
        if spec.extend:
            lo, hi = col.mean() - 2 * col.std(), col.mean() + 2 * col.std()
        else:
            lo, hi = col.min(), col.max()
        grids.append(np.linspace(lo, hi, spec.steps))

    mesh = np.meshgrid(z0_values, *grids, indexing="ij")
    flat = [m.ravel() for m in mesh]
    n_rows = flat[0].size

    z0_block = np.tile(mu[:, :d_z0].mean(axis=0), (n_rows, 1))
    z0_block[:, z0_dim] = flat[0]
    z1_block = np.tile(mu[:, d_z0:].mean(axis=0), (n_rows, 1))
    for j, d in enumerate(z1_dims):
        z1_block[:, d] = flat[1 + j]

    y_hat = model.predict_y(z0_block)
    x_hat = model.decode_input(z1_block, y_hat)
    x_orig = unlift(x_hat, dataset.lift)

    mu_re = check_matrix(model.encode_mean(x_hat), "re-encoded means")
    y_re = model.predict_y(mu_re[:, :d_z0])
    y_pred = unlift_y(y_re, dataset.lift)[:, 0]

    columns = (["z0_value"] + [f"z1_{d}" for d in z1_dims]
               + [f"x_orig_{i}" for i in range(x_orig.shape[1])] + ["y_pred"])
    rows = np.column_stack([flat[0], *flat[1:], x_orig, y_pred])
    return {
        "columns": columns,
        "rows": rows,
        "z0_dim": z0_dim,
        "z1_dims": z1_dims,
        "z0_values": z0_values.tolist(),
        "y_hat_lifted": y_hat,
        "y_pred_lifted": y_re,
        "x_decoded": x_hat,
    }


def save_traversal(table: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table["columns"])
        for row in table["rows"]:
            writer.writerow([f"{v:.17g}" for v in row])
    return path


def save_sparsity(sigma_signal, sigma_noise, selected, d_z0: int, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim", "sigma_signal", "sigma_noise", "selected", "subspace"])
        for d, (sig, noi, sel) in enumerate(zip(sigma_signal, sigma_noise, selected)):
            writer.writerow([d, f"{sig:.17g}", f"{noi:.17g}", int(sel),
                             "z0" if d < d_z0 else "z1"])
    return path


def evaluate(model, dataset: Dataset, n_samples: int = 400, n_references: int = 25,
             seed: int = 0) -> EvalReport:
    """Full evaluation on the dataset's test split."""
    X_test, Y_test = dataset.X_test, dataset.Y_test
    mae_x, mae_y = reconstruction_maes(model, X_test, Y_test)
    sigma_signal, sigma_noise, selected = sparsity_report(model, X_test)
    inv = invariance_mae(model, X_test, n_samples=n_samples,
                         n_references=n_references, seed=seed)
    return EvalReport(
        mae_x=mae_x, mae_y=mae_y, invariance_mae=inv,
        sigma_signal=sigma_signal, sigma_noise=sigma_noise, selected_dims=selected,
        n_references=min(n_references, len(X_test)), n_samples_per_reference=n_samples,
        d_z0=model.config.d_z0,
    )
