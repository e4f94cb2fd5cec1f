"""Partitioned-latent encoder/decoder model.

The encoder produces latent means; codes are means plus Gaussian noise
(fixed unit scale, or a learned per-dimension scale for the plain-VAE
baseline). The property is decoded from the first block Z0 only, and the
input is decoded from the remaining block Z1 concatenated with the decoded
property, never from raw Z0, so property information is pushed into Z0.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError
from .ndmath.nets import DenseLayer, forward, forward_np, init_layers
from .ndmath.rng import STREAM_PARAM_INIT, substream
from .ndmath.tensor import Tensor, add, concat, exp, mul, take
from .validation import check_matrix

NOISE_MODES = ("fixed_unit", "learned_per_dim")


@dataclass
class ModelConfig:
    d_in: int = 5
    d_y: int = 3
    d_z0: int = 3
    d_z1: int = 5
    encoder_widths: tuple[int, ...] = (64, 64)
    decx_widths: tuple[int, ...] = (64, 64)
    decy_widths: tuple[int, ...] = (64, 64)
    noise_mode: str = "fixed_unit"
    # init gain on the encoder output layer: codes must start above the unit
    # sampling noise or the property path never wakes up (see README)
    encoder_output_gain: float = 8.0
    lam: float = 10.0
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("d_in", "d_y", "d_z0", "d_z1"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"noise_mode must be one of {NOISE_MODES}, got {self.noise_mode!r}")
        if self.lam <= 0:
            raise ConfigError(f"lam must be > 0, got {self.lam}")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.encoder_output_gain <= 0:
            raise ConfigError(f"encoder_output_gain must be > 0, got {self.encoder_output_gain}")
        self.encoder_widths = tuple(int(w) for w in self.encoder_widths)
        self.decx_widths = tuple(int(w) for w in self.decx_widths)
        self.decy_widths = tuple(int(w) for w in self.decy_widths)

    @property
    def d_z(self) -> int:
        return self.d_z0 + self.d_z1

    def to_dict(self) -> dict:
        return {
            "d_in": self.d_in, "d_y": self.d_y, "d_z0": self.d_z0, "d_z1": self.d_z1,
            "encoder_widths": list(self.encoder_widths),
            "decx_widths": list(self.decx_widths),
            "decy_widths": list(self.decy_widths),
            "noise_mode": self.noise_mode,
            "encoder_output_gain": self.encoder_output_gain,
            "lam": self.lam, "beta": self.beta, "seed": self.seed,
        }


@dataclass
class LatentBatch:
    """Means, sampled codes, and the two partition views of the codes."""

    mu: Tensor
    z: Tensor
    z0: Tensor
    z1: Tensor


@dataclass
class CycleVibModel:
    encoder: list[DenseLayer]
    dec_y: list[DenseLayer]
    dec_x: list[DenseLayer]
    config: ModelConfig
    log_noise: Tensor | None = field(default=None)

    @classmethod
    def create(cls, config: ModelConfig) -> "CycleVibModel":
        rng = substream(config.seed, STREAM_PARAM_INIT)
        encoder = init_layers([config.d_in, *config.encoder_widths, config.d_z], rng,
                              name="encoder")
        encoder[-1].weights.data *= config.encoder_output_gain
        dec_y = init_layers([config.d_z0, *config.decy_widths, config.d_y], rng, name="dec_y")
        dec_x = init_layers([config.d_z1 + config.d_y, *config.decx_widths, config.d_in], rng,
                            name="dec_x")
        log_noise = None
        if config.noise_mode == "learned_per_dim":
            log_noise = Tensor(np.zeros(config.d_z), requires_grad=True, name="log_noise")
        return cls(encoder, dec_y, dec_x, config, log_noise)

    def parameters(self) -> list[Tensor]:
        params = [p for stack in (self.encoder, self.dec_y, self.dec_x)
                  for layer in stack for p in layer.parameters()]
        if self.log_noise is not None:
            params.append(self.log_noise)
        return params

    def noise_std(self) -> np.ndarray:
        """Per-dimension sampling noise scale (exactly 1 in fixed_unit mode)."""
        if self.log_noise is None:
            return np.ones(self.config.d_z)
        return np.exp(self.log_noise.data)

    # -- taped paths (training) ----------------------------------------------

    def encode(self, X, eps: np.ndarray | None = None,
               rng: np.random.Generator | None = None) -> LatentBatch:
        """Reparameterized encoding: z = mu + sigma * eps.

        `eps` defaults to zeros (deterministic); pass `rng` to draw unit
        Gaussian noise. Gradients flow through mu and, in learned mode,
        through the noise scale.
        """
        x = X if isinstance(X, Tensor) else Tensor(check_matrix(X, "X", n_cols=self.config.d_in))
        if x.data.shape[1] != self.config.d_in:
            raise ShapeError(f"X has {x.data.shape[1]} columns, model expects {self.config.d_in}")
        mu = forward(self.encoder, x)
        if eps is None and rng is not None:
            eps = rng.standard_normal(mu.data.shape)
        if eps is None:
            z = mu
        else:
            eps = np.asarray(eps, dtype=np.float64)
            if eps.shape != mu.data.shape:
                raise ShapeError(f"eps shape {eps.shape} != means shape {mu.data.shape}")
            if self.log_noise is None:
                z = add(mu, Tensor(eps))
            else:
                z = add(mu, mul(exp(self.log_noise), Tensor(eps)))
        z0 = take(z, (slice(None), slice(0, self.config.d_z0)))
        z1 = take(z, (slice(None), slice(self.config.d_z0, None)))
        return LatentBatch(mu=mu, z=z, z0=z0, z1=z1)

    def decode_y(self, z0: Tensor) -> Tensor:
        if z0.data.shape[1] != self.config.d_z0:
            raise ShapeError(f"z0 has {z0.data.shape[1]} columns, expected {self.config.d_z0}")
        return forward(self.dec_y, z0)

    def decode_x(self, z1: Tensor, y_hat: Tensor) -> Tensor:
        if z1.data.shape[1] != self.config.d_z1:
            raise ShapeError(f"z1 has {z1.data.shape[1]} columns, expected {self.config.d_z1}")
        if y_hat.data.shape[1] != self.config.d_y:
            raise ShapeError(f"y_hat has {y_hat.data.shape[1]} columns, expected {self.config.d_y}")
        return forward(self.dec_x, concat([z1, y_hat], axis=1))

    def full_cycle(self, X, eps: np.ndarray | None = None,
                   rng: np.random.Generator | None = None):
        """encode -> decode property from Z0 -> decode input from (Z1, Y-hat)."""
        latent = self.encode(X, eps=eps, rng=rng)
        y_hat = self.decode_y(latent.z0)
        x_hat = self.decode_x(latent.z1, y_hat)
        return x_hat, y_hat, latent

    # -- plain numpy paths (inference/evaluation) ------------------------------

    def encode_mean(self, X: np.ndarray) -> np.ndarray:
        X = check_matrix(X, "X", n_cols=self.config.d_in)
        return forward_np(self.encoder, X)

    def predict_y(self, z0: np.ndarray) -> np.ndarray:
        z0 = check_matrix(z0, "z0", n_cols=self.config.d_z0)
        return forward_np(self.dec_y, z0)

    def decode_input(self, z1: np.ndarray, y_hat: np.ndarray) -> np.ndarray:
        z1 = check_matrix(z1, "z1", n_cols=self.config.d_z1)
        y_hat = check_matrix(y_hat, "y_hat", n_cols=self.config.d_y)
        return forward_np(self.dec_x, np.hstack([z1, y_hat]))


# -- checkpoints ----------------------------------------------------------------

def save_checkpoint(model: CycleVibModel, path, step: int = 0,
                    metrics: dict | None = None) -> tuple[Path, Path]:
    """Write `<path>.json` (manifest) and `<path>.bin` (flat little-endian
    float64 parameters in declaration order, hashed into the manifest)."""
    stem = Path(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    blob = b"".join(np.ascontiguousarray(p.data, dtype="<f8").tobytes()
                    for p in model.parameters())
    manifest = {
        "config": model.config.to_dict(),
        "seed": model.config.seed,
        "step": step,
        "metrics": metrics or {},
        "param_count": sum(p.size for p in model.parameters()),
        "sha256": hashlib.sha256(blob).hexdigest(),
    }
    bin_path = stem.with_suffix(".bin")
    json_path = stem.with_suffix(".json")
    bin_path.write_bytes(blob)
    with open(json_path, "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return json_path, bin_path


def load_checkpoint(path) -> tuple[CycleVibModel, dict]:
    stem = Path(path)
    with open(stem.with_suffix(".json")) as fh:
        manifest = json.load(fh)
    blob = stem.with_suffix(".bin").read_bytes()
    if hashlib.sha256(blob).hexdigest() != manifest["sha256"]:
        raise ConfigError(f"checkpoint blob hash mismatch for {stem}")
    cfg_dict = dict(manifest["config"])
    for key in ("encoder_widths", "decx_widths", "decy_widths"):
        cfg_dict[key] = tuple(cfg_dict[key])
    model = CycleVibModel.create(ModelConfig(**cfg_dict))
    flat = np.frombuffer(blob, dtype="<f8")
    if flat.size != manifest["param_count"]:
        raise ConfigError("checkpoint parameter count mismatch")
    offset = 0
    for p in model.parameters():
        p.data = flat[offset:offset + p.size].reshape(p.data.shape).astype(np.float64)
        offset += p.size
    if offset != flat.size:
        raise ConfigError("checkpoint blob does not match the model's parameter layout")
    return model, manifest
