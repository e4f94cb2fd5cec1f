"""Loss terms: sparse compression, Gaussian likelihoods, and the three-part
property cycle loss, assembled into the single training objective.

Conventions (documented because the source formulas leave them open):
the per-dimension second moment in the compression term is normalized by
batch size, and each cycle term is the batch mean of row-wise L2 norms, so
the weights stay comparable across batch sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .ndmath.tensor import Tensor, exp, log, norm, square, sub, tmean, tsum


@dataclass
class LossWeights:
    """lam trades compression against the likelihood bracket; beta weights the
    cycle terms inside that bracket. beta = 0 plus standard-KL compression is
    exactly the plain partitioned-VAE baseline."""

    lam: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError(f"lam must be > 0, got {self.lam}")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")


@dataclass
class LossReport:
    """Scalar values of every objective term for one batch."""

    compression: float
    nll_x: float
    nll_y: float
    cycle_recon: float
    cycle_sample: float
    cycle_fixed: float
    total: float

    CSV_HEADER = ("step", "compression", "nll_x", "nll_y",
                  "cycle_recon", "cycle_sample", "cycle_fixed", "total")

    def csv_row(self, step: int) -> list:
        return [step, self.compression, self.nll_x, self.nll_y,
                self.cycle_recon, self.cycle_sample, self.cycle_fixed, self.total]


def sparse_compression(mu: Tensor, dim_weights: np.ndarray | None = None) -> Tensor:
    """Half the log-volume of the diagonal second-moment projection plus one.

    With m_j the per-dimension mean square of the encoder means, returns
    0.5 * sum_j w_j log(1 + m_j). Dimensions whose means collapse to zero
    cost nothing; informative dimensions pay only logarithmically. The
    optional per-dimension weights let a schedule relax the pressure on
    chosen dimensions without releasing the rest.
    """
    if mu.data.ndim != 2:
        raise ShapeError(f"expected a 2-D batch of means, got shape {mu.shape}")
    if mu.data.shape[0] == 0:
        raise ShapeError("sparse_compression of an empty batch")
    m = tmean(square(mu), axis=0)
    per_dim = log(m + 1.0)
    if dim_weights is not None:
        dim_weights = np.asarray(dim_weights, dtype=np.float64)
        if dim_weights.shape != (mu.data.shape[1],):
            raise ShapeError("dim_weights length does not match the latent width")
        per_dim = per_dim * Tensor(dim_weights)
    return 0.5 * tsum(per_dim)


def standard_kl(mu: Tensor, log_noise: Tensor | None = None,
                dim_weights: np.ndarray | None = None) -> Tensor:
    """Batch mean of the closed-form Gaussian KL to the unit prior."""
    if mu.data.ndim != 2:
        raise ShapeError(f"expected a 2-D batch of means, got shape {mu.shape}")
    per_dim = square(mu)
    if log_noise is not None:
        if log_noise.data.shape != (mu.data.shape[1],):
            raise ShapeError("log_noise length does not match the latent width")
        per_dim = per_dim + (exp(2.0 * log_noise) - 1.0 - 2.0 * log_noise)
    if dim_weights is not None:
        dim_weights = np.asarray(dim_weights, dtype=np.float64)
        if dim_weights.shape != (mu.data.shape[1],):
            raise ShapeError("dim_weights length does not match the latent width")
        per_dim = per_dim * Tensor(dim_weights)
    return 0.5 * tmean(tsum(per_dim, axis=1))


def gaussian_nll(target, prediction: Tensor) -> Tensor:
    """Unit-variance Gaussian negative log likelihood, constants dropped:
    half the squared residual per row, averaged over the batch."""
    target = target if isinstance(target, Tensor) else Tensor(np.asarray(target, dtype=np.float64))
    if target.data.shape != prediction.data.shape:
        raise ShapeError(
            f"target shape {target.data.shape} != prediction shape {prediction.data.shape}")
    return 0.5 * tmean(tsum(square(sub(prediction, target)), axis=1))


def cycle_loss(y_hat, y_hat_prime, y_tilde, y_tilde_prime,
               y_tilde_star_target, y_tilde_star) -> tuple[Tensor, Tensor, Tensor]:
    """The three property-consistency terms, each a batch mean of row norms:
    reconstructed vs re-predicted, sampled vs re-predicted, and fixed-anchor
    vs re-predicted at fixed property coordinates."""
    def term(a, b):
        a = a if isinstance(a, Tensor) else Tensor(np.asarray(a, dtype=np.float64))
        b = b if isinstance(b, Tensor) else Tensor(np.asarray(b, dtype=np.float64))
        if a.data.shape != b.data.shape:
            raise ShapeError(f"cycle pair shapes differ: {a.data.shape} vs {b.data.shape}")
        return tmean(norm(sub(a, b), axis=1))

    return (term(y_hat, y_hat_prime),
            term(y_tilde, y_tilde_prime),
            term(y_tilde_star_target, y_tilde_star))


def total_loss(compression: Tensor, nll_x: Tensor, nll_y: Tensor,
               cycle_recon: Tensor, cycle_sample: Tensor, cycle_fixed: Tensor,
               weights: LossWeights) -> Tensor:
    """Assemble the full objective to minimize:
    compression + lam * (nll_x + nll_y + beta * (cycle terms))."""
    for name, t in (("compression", compression), ("nll_x", nll_x), ("nll_y", nll_y),
                    ("cycle_recon", cycle_recon), ("cycle_sample", cycle_sample),
                    ("cycle_fixed", cycle_fixed)):
        val = t.data if isinstance(t, Tensor) else t
        if not np.all(np.isfinite(val)):
            raise NumericError(f"loss term '{name}' is non-finite")
    cycles = cycle_recon + cycle_sample + cycle_fixed
    return compression + weights.lam * (nll_x + nll_y + weights.beta * cycles)
