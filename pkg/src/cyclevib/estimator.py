"""Scikit-learn style facade over the model and trainer.

Composes with the wider ecosystem: `CycleVib` supports get_params/set_params,
clone, pipelines, and the usual fit/predict/transform triple. `transform`
returns latent means; `predict` returns the decoded property.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .model import ModelConfig
from .objectives import LossWeights
from .trainer import TrainConfig, fit_arrays
from .validation import check_matrix


class CycleVib(BaseEstimator, RegressorMixin, TransformerMixin):
    """Cycle-consistent conditional-invariance bottleneck regressor.

    Parameters mirror the model and training configuration; see ModelConfig
    and TrainConfig for semantics. After `fit`, the trained low-level model
    is available as `model_` and the logged loss history as `history_`.
    """

    def __init__(self, d_z0=3, d_z1=5, encoder_widths=(64, 64), decx_widths=(64, 64),
                 decy_widths=(64, 64), noise_mode="fixed_unit", encoder_output_gain=8.0,
                 lam=10.0, beta=1.0, epochs=500, batch_size=256, lr=1e-3,
                 warmup_steps=1000, anneal_start_step=5250, anneal_floor=0.25,
                 anneal_threshold=1.3, compression="sparse", log_every=50, seed=0):
        self.d_z0 = d_z0
        self.d_z1 = d_z1
        self.encoder_widths = encoder_widths
        self.decx_widths = decx_widths
        self.decy_widths = decy_widths
        self.noise_mode = noise_mode
        self.encoder_output_gain = encoder_output_gain
        self.lam = lam
        self.beta = beta
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.warmup_steps = warmup_steps
        self.anneal_start_step = anneal_start_step
        self.anneal_floor = anneal_floor
        self.anneal_threshold = anneal_threshold
        self.compression = compression
        self.log_every = log_every
        self.seed = seed

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        y = check_matrix(y, "y")
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)}")

        model_config = ModelConfig(
            d_in=X.shape[1], d_y=y.shape[1], d_z0=self.d_z0, d_z1=self.d_z1,
            encoder_widths=tuple(self.encoder_widths), decx_widths=tuple(self.decx_widths),
            decy_widths=tuple(self.decy_widths), noise_mode=self.noise_mode,
            encoder_output_gain=self.encoder_output_gain,
            lam=self.lam, beta=self.beta, seed=self.seed,
        )
        train_config = TrainConfig(
            epochs=self.epochs, batch_size=min(self.batch_size, len(X)), lr=self.lr,
            warmup_steps=self.warmup_steps, anneal_start_step=self.anneal_start_step,
            anneal_floor=self.anneal_floor, anneal_threshold=self.anneal_threshold,
            compression=self.compression,
            log_every=self.log_every, seed=self.seed,
        )
        state = fit_arrays(X, y, model_config, train_config,
                           weights=LossWeights(lam=self.lam, beta=self.beta))
        self.model_ = state.model
        self.train_state_ = state
        self.history_ = state.history
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Latent means of X, shape (n, d_z0 + d_z1)."""
        check_is_fitted(self, "model_")
        X = check_matrix(X, "X", n_cols=self.n_features_in_)
        return self.model_.encode_mean(X)

    def predict(self, X):
        """Decoded property for each row of X."""
        mu = self.transform(X)
        out = self.model_.predict_y(mu[:, :self.model_.config.d_z0])
        return out[:, 0] if out.shape[1] == 1 else out

    def reconstruct(self, X):
        """Round-trip reconstruction of X through the partitioned code."""
        mu = self.transform(X)
        d_z0 = self.model_.config.d_z0
        y_hat = self.model_.predict_y(mu[:, :d_z0])
        return self.model_.decode_input(mu[:, d_z0:], y_hat)
