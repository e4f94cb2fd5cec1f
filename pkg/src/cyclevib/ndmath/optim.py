"""Bias-corrected adaptive first-order optimizer (Adam-style updates)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from .tensor import Tensor


@dataclass
class OptimizerState:
    """Per-parameter moment buffers plus the scalar hyperparameters."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)


def init_optimizer(params: list[Tensor], learning_rate: float = 1e-3, beta1: float = 0.9,
                   beta2: float = 0.999, epsilon: float = 1e-8) -> OptimizerState:
    if learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    return OptimizerState(
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        first_moment=[np.zeros_like(p.data) for p in params],
        second_moment=[np.zeros_like(p.data) for p in params],
    )


def optimizer_step(params: list[Tensor], state: OptimizerState,
                   grads: list[np.ndarray] | None = None) -> None:
    """Apply one bias-corrected update in place.

    Gradients default to each parameter's `.grad`. All gradients are
    validated before any parameter is touched, so a NaN aborts the whole
    step without a partial update.
    """
    if len(state.first_moment) != len(params):
        raise ShapeError("optimizer state does not match the parameter list")
    if grads is None:
        grads = [p.grad for p in params]

    resolved: list[np.ndarray] = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            g = np.zeros_like(p.data)
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.data.shape:
            raise ShapeError(
                f"gradient shape {g.shape} does not match parameter "
                f"{p.name or i} of shape {p.data.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {p.name or i}")
        resolved.append(g)

    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    lr, eps = state.learning_rate, state.epsilon
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, resolved, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    state.step_count = t
