"""Training loop: the three-phase batch procedure and its optimization.

Each step (a) reconstructs the batch and predicts its property, (b) draws
two kinds of latent samples -- uniform over the whole code space, and
uniform over the invariant block with the property block pinned to each
batch element's code -- then (c) concatenates all generated inputs, pushes
them back through the network and scores the property cycle consistency.
One joint optimizer update covers all three phases.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ConfigError, ShapeError
from .model import CycleVibModel, ModelConfig, save_checkpoint
from .ndmath.optim import OptimizerState, init_optimizer, optimizer_step
from .ndmath.rng import (
    STREAM_LATENT_SAMPLING,
    STREAM_REPARAM_NOISE,
    STREAM_SHUFFLE,
    substream,
)
from .ndmath.tensor import Tensor, concat, take
from .objectives import (
    LossReport,
    LossWeights,
    cycle_loss,
    gaussian_nll,
    sparse_compression,
    standard_kl,
    total_loss,
)

COMPRESSION_MODES = ("sparse", "standard_kl")


@dataclass
class TrainConfig:
    """Defaults are the reference experiment schedule for the level-set tasks
    (about seven minutes single-core on the 10k-point ellipse)."""

    epochs: int = 500
    batch_size: int = 256
    lr: float = 1e-3
    n_uniform_samples: int | None = None   # None -> batch_size
    n_fixed_z0_samples: int | None = None  # None -> batch_size
    log_every: int = 50
    checkpoint_every: int = 0              # 0 -> final checkpoint only
    compression: str = "sparse"
    warmup_steps: int = 1000               # linear ramp-in of compression + cycle weight
    anneal_start_step: int = 5250          # 0 -> off; after this step the compression
    anneal_floor: float = 0.25             # weight drops to anneal_floor (sharpening phase)
    anneal_threshold: float = 1.3          # signal/noise ratio a dim needs to be relaxed
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size <= 0:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        for name in ("n_uniform_samples", "n_fixed_z0_samples"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.log_every <= 0:
            raise ConfigError(f"log_every must be positive, got {self.log_every}")
        if self.compression not in COMPRESSION_MODES:
            raise ConfigError(f"compression must be one of {COMPRESSION_MODES}")
        if self.warmup_steps < 0:
            raise ConfigError("warmup_steps must be >= 0")
        if not 0.0 < self.anneal_floor <= 1.0:
            raise ConfigError("anneal_floor must be in (0, 1]")
        if self.anneal_start_step < 0:
            raise ConfigError("anneal_start_step must be >= 0")
        if self.anneal_start_step and self.anneal_start_step <= self.warmup_steps:
            raise ConfigError("anneal_start_step must come after the warmup")
        if self.anneal_threshold <= 0:
            raise ConfigError("anneal_threshold must be > 0")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs, "batch_size": self.batch_size, "lr": self.lr,
            "n_uniform_samples": self.n_uniform_samples,
            "n_fixed_z0_samples": self.n_fixed_z0_samples,
            "log_every": self.log_every, "checkpoint_every": self.checkpoint_every,
            "compression": self.compression,
            "warmup_steps": self.warmup_steps,
            "anneal_start_step": self.anneal_start_step,
            "anneal_floor": self.anneal_floor,
            "anneal_threshold": self.anneal_threshold,
            "seed": self.seed,
        }


@dataclass
class LatentStats:
    """Per-dimension mean and standard deviation of a batch of encoder means."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_means(cls, mu: np.ndarray) -> "LatentStats":
        mu = np.asarray(mu, dtype=np.float64)
        return cls(mean=mu.mean(axis=0), std=mu.std(axis=0))


@dataclass
class TrainState:
    model: CycleVibModel
    optimizer: OptimizerState
    config: TrainConfig
    weights: LossWeights
    epoch: int = 0
    step: int = 0
    history: list = field(default_factory=list)
    anneal_weights: np.ndarray | None = None  # per-dim compression weights, set once
    noise_rng: np.random.Generator = None
    latent_rng: np.random.Generator = None
    shuffle_rng: np.random.Generator = None


def init_train_state(model: CycleVibModel, config: TrainConfig,
                     weights: LossWeights | None = None) -> TrainState:
    if weights is None:
        weights = LossWeights(lam=model.config.lam, beta=model.config.beta)
    return TrainState(
        model=model,
        optimizer=init_optimizer(model.parameters(), learning_rate=config.lr),
        config=config,
        weights=weights,
        noise_rng=substream(config.seed, STREAM_REPARAM_NOISE),
        latent_rng=substream(config.seed, STREAM_LATENT_SAMPLING),
        shuffle_rng=substream(config.seed, STREAM_SHUFFLE),
    )


def sample_uniform_latent(stats: LatentStats, count: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Uniform draws in [mean - std, mean + std] per latent dimension."""
    if count <= 0:
        raise ConfigError(f"count must be positive, got {count}")
    std = np.asarray(stats.std, dtype=np.float64)
    if np.all(std == 0.0):
        warnings.warn("all latent dimensions are degenerate; sampling +/-1 around the mean",
                      RuntimeWarning, stacklevel=2)
        std = np.ones_like(std)
    elif np.any(std == 0.0):
        warnings.warn("degenerate latent dimension(s): keeping them constant at the mean",
                      RuntimeWarning, stacklevel=2)
    return rng.uniform(stats.mean - std, stats.mean + std, size=(count, std.size))


def sample_fixed_z0(z0_anchor: np.ndarray, stats: LatentStats, count: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Codes sharing one property-block anchor, uniform in the invariant block."""
    anchor = np.asarray(z0_anchor, dtype=np.float64).ravel()
    d_z0 = anchor.size
    if d_z0 >= stats.mean.size:
        raise ShapeError("anchor spans the whole latent space; nothing left to sample")
    z1_stats = LatentStats(mean=stats.mean[d_z0:], std=stats.std[d_z0:])
    z1 = sample_uniform_latent(z1_stats, count, rng)
    return np.hstack([np.tile(anchor, (count, 1)), z1])


def train_step(state: TrainState, X_batch: np.ndarray, Y_batch: np.ndarray,
               weights: LossWeights | None = None) -> LossReport:
    """One joint update over the three phases; atomic on numeric failure."""
    model = state.model
    cfg = state.config
    weights = weights or state.weights
    B = X_batch.shape[0]
    if X_batch.shape[1] != model.config.d_in or Y_batch.shape[1] != model.config.d_y:
        raise ShapeError("batch shapes do not match the model configuration")

    # regularizers ramp in linearly so both likelihood paths wake up before
    # compression prunes and the cycle terms start flattening the predictor
    ramp = 1.0
    if cfg.warmup_steps > 0 and state.step < cfg.warmup_steps:
        ramp = state.step / cfg.warmup_steps
    beta_eff = weights.beta * ramp

    # (a) reconstruct and predict
    eps = state.noise_rng.standard_normal((B, model.config.d_z))
    x_hat, y_hat, latent = model.full_cycle(X_batch, eps=eps)

    # support-aware anneal: once pruning has settled, relax compression on
    # the dimensions selected at that moment so they sharpen; unselected
    # dimensions keep full pressure and cannot revive
    dim_weights = state.anneal_weights
    if (cfg.anneal_start_step > 0 and state.step >= cfg.anneal_start_step
            and dim_weights is None):
        decisive = latent.mu.data.std(axis=0) > cfg.anneal_threshold * model.noise_std()
        dim_weights = np.where(decisive, cfg.anneal_floor, 1.0)
        state.anneal_weights = dim_weights

    if cfg.compression == "sparse":
        compression = sparse_compression(latent.mu, dim_weights=dim_weights)
    else:
        compression = standard_kl(latent.mu, model.log_noise, dim_weights=dim_weights)
    if ramp < 1.0:
        compression = ramp * compression
    nll_x = gaussian_nll(X_batch, x_hat)
    nll_y = gaussian_nll(Y_batch, y_hat)

    if weights.beta > 0:
        # (b) two sampling schemes in latent space
        stats = LatentStats.from_means(latent.mu.data)
        n_uni = cfg.n_uniform_samples or B
        n_fix = cfg.n_fixed_z0_samples or B
        z_tilde = Tensor(sample_uniform_latent(stats, n_uni, state.latent_rng))
        zt0 = take(z_tilde, (slice(None), slice(0, model.config.d_z0)))
        zt1 = take(z_tilde, (slice(None), slice(model.config.d_z0, None)))
        y_tilde = model.decode_y(zt0)
        x_tilde = model.decode_x(zt1, y_tilde)

        z1_stats = LatentStats(mean=stats.mean[model.config.d_z0:],
                               std=stats.std[model.config.d_z0:])
        z1_star = Tensor(sample_uniform_latent(z1_stats, n_fix, state.latent_rng))
        if n_fix == B:
            y_star_target = y_hat
        else:
            y_star_target = take(y_hat, (np.arange(n_fix) % B,))
        # dec_y(anchor z0) equals y_hat: reuse it as the property input
        x_star = model.decode_x(z1_star, y_star_target)

        # (c) close the cycle on the concatenated generated batch
        x_c = concat([x_hat, x_tilde, x_star], axis=0)
        eps_c = state.noise_rng.standard_normal((B + n_uni + n_fix, model.config.d_z))
        latent_c = model.encode(x_c, eps=eps_c)
        y_re = model.decode_y(latent_c.z0)
        y_hat_prime = take(y_re, (slice(0, B),))
        y_tilde_prime = take(y_re, (slice(B, B + n_uni),))
        y_tilde_star = take(y_re, (slice(B + n_uni, None),))
        c_recon, c_sample, c_fixed = cycle_loss(y_hat, y_hat_prime, y_tilde, y_tilde_prime,
                                                y_star_target, y_tilde_star)
    else:
        zero = Tensor(np.zeros(()))
        c_recon = c_sample = c_fixed = zero

    step_weights = weights if beta_eff == weights.beta else LossWeights(weights.lam, beta_eff)
    total = total_loss(compression, nll_x, nll_y, c_recon, c_sample, c_fixed, step_weights)
    params = model.parameters()
    for p in params:
        p.zero_grad()
    total.backward()
    optimizer_step(params, state.optimizer)
    state.step += 1
    return LossReport(
        compression=compression.item(), nll_x=nll_x.item(), nll_y=nll_y.item(),
        cycle_recon=c_recon.item(), cycle_sample=c_sample.item(),
        cycle_fixed=c_fixed.item(), total=total.item(),
    )


def fit(dataset: Dataset, model_config: ModelConfig, train_config: TrainConfig,
        weights: LossWeights | None = None, curve_path=None, checkpoint_path=None,
        initial_model: CycleVibModel | None = None) -> TrainState:
    """Shuffled mini-batch training over the dataset's train split.

    Deterministic end to end for fixed seeds. Partial trailing batches are
    dropped so every step sees identical row counts. When `checkpoint_path`
    is set, checkpoints land there every `checkpoint_every` logged steps and
    at the end; resuming from a saved model restarts the optimizer moments.
    """
    if dataset.X.shape[1] != model_config.d_in:
        raise ConfigError(f"dataset X has {dataset.X.shape[1]} columns, "
                          f"model expects {model_config.d_in}")
    if dataset.Y.shape[1] != model_config.d_y:
        raise ConfigError(f"dataset Y has {dataset.Y.shape[1]} columns, "
                          f"model expects {model_config.d_y}")
    return fit_arrays(dataset.X[dataset.train_idx], dataset.Y[dataset.train_idx],
                      model_config, train_config, weights=weights, curve_path=curve_path,
                      checkpoint_path=checkpoint_path, initial_model=initial_model)


def fit_arrays(X_train: np.ndarray, Y_train: np.ndarray, model_config: ModelConfig,
               train_config: TrainConfig, weights: LossWeights | None = None,
               curve_path=None, checkpoint_path=None,
               initial_model: CycleVibModel | None = None) -> TrainState:
    if len(X_train) < train_config.batch_size and train_config.epochs > 0:
        raise ConfigError("train split is smaller than one batch")

    model = initial_model if initial_model is not None else CycleVibModel.create(model_config)
    state = init_train_state(model, train_config, weights)

    curve_writer = None
    curve_fh = None
    if curve_path is not None:
        curve_fh = open(Path(curve_path), "w", newline="")
        curve_writer = csv.writer(curve_fh)
        curve_writer.writerow(LossReport.CSV_HEADER)

    n_batches = len(X_train) // train_config.batch_size
    try:
        for epoch in range(train_config.epochs):
            order = state.shuffle_rng.permutation(len(X_train))
            for b in range(n_batches):
                rows = order[b * train_config.batch_size:(b + 1) * train_config.batch_size]
                report = train_step(state, X_train[rows], Y_train[rows])
                if state.step % train_config.log_every == 0:
                    state.history.append(report)
                    if curve_writer is not None:
                        curve_writer.writerow(report.csv_row(state.step))
                    if (checkpoint_path is not None and train_config.checkpoint_every > 0
                            and (len(state.history) % train_config.checkpoint_every == 0)):
                        save_checkpoint(model, checkpoint_path, step=state.step)
            state.epoch = epoch + 1
    finally:
        if curve_fh is not None:
            curve_fh.close()
    if checkpoint_path is not None:
        save_checkpoint(model, checkpoint_path, step=state.step)
    return state


# -- weight sweep -----------------------------------------------------------------

def _sweep_job(args):
    from .evaluation import evaluate  # local import to keep module load cheap

    dataset, model_config, train_config, lam, beta = args
    cfg = ModelConfig(**{**model_config.to_dict(), "lam": lam, "beta": beta})
    state = fit(dataset, cfg, train_config)
    report = evaluate(state.model, dataset)
    return {
        "lam": lam, "beta": beta,
        "mae_x": report.mae_x, "mae_y": report.mae_y,
        "invariance_mae": report.invariance_mae,
        "selected_z0": int(np.sum(report.selected_dims[:cfg.d_z0])),
        "selected_z1": int(np.sum(report.selected_dims[cfg.d_z0:])),
    }


def run_sweep(dataset: Dataset, model_config: ModelConfig, train_config: TrainConfig,
              lams, betas, max_workers: int | None = None) -> list[dict]:
    """Train/evaluate one model per (lam, beta) pair, in parallel processes."""
    jobs = [(dataset, model_config, train_config, float(l), float(b))
            for l in lams for b in betas]
    if max_workers == 1:
        return [_sweep_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_sweep_job, jobs))


def recommend_weights(rows: list[dict], tol: float = 0.25) -> dict:
    """Sweep stopping rule: among configurations whose reconstruction and
    prediction errors stay within (1 + tol) of the sweep's best, pick the one
    with the lowest invariance error (i.e. push the invariance pressure up
    until accuracy visibly drops)."""
    if not rows:
        raise ConfigError("empty sweep")
    best_x = min(r["mae_x"] for r in rows)
    best_y = min(r["mae_y"] for r in rows)
    ok = [r for r in rows if r["mae_x"] <= (1 + tol) * best_x and r["mae_y"] <= (1 + tol) * best_y]
    if not ok:
        ok = rows
    return min(ok, key=lambda r: r["invariance_mae"])
