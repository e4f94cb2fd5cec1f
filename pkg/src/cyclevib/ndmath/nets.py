"""Fully-connected layers and their taped/plain forward passes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError
from .tensor import Tensor, add, matmul, relu, softplus, tanh, transpose

ACTIVATIONS = ("identity", "tanh", "relu", "softplus")

_NP_ACT = {
    "identity": lambda x: x,
    "tanh": np.tanh,
    "relu": lambda x: np.maximum(x, 0.0),
    "softplus": lambda x: np.logaddexp(0.0, x),
}

_TENSOR_ACT = {
    "identity": lambda x: x,
    "tanh": tanh,
    "relu": relu,
    "softplus": softplus,
}


@dataclass
class DenseLayer:
    """One affine layer: activation(x @ weights.T + bias).

    weights is (out, in), bias is (out,).
    """

    weights: Tensor
    bias: Tensor
    activation: str = "identity"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        if self.weights.data.ndim != 2:
            raise ShapeError(f"layer weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.data.shape != (self.weights.data.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} inconsistent with weights shape {self.weights.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.data.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.data.shape[0]

    def parameters(self) -> list[Tensor]:
        return [self.weights, self.bias]


def forward(layers, x: Tensor) -> Tensor:
    """Taped forward pass through a layer stack."""
    if not layers:
        raise ConfigError("forward over an empty layer stack")
    if x.data.ndim != 2:
        raise ShapeError(f"forward expects a 2-D batch, got shape {x.shape}")
    h = x
    for i, layer in enumerate(layers):
        if h.data.shape[-1] != layer.in_dim:
            raise ShapeError(
                f"layer {i} expects {layer.in_dim} inputs but received {h.data.shape[-1]}"
            )
        h = _TENSOR_ACT[layer.activation](add(matmul(h, transpose(layer.weights)), layer.bias))
    return h


def forward_np(layers, X: np.ndarray) -> np.ndarray:
    """Plain numpy forward pass (no tape); same arithmetic as `forward`."""
    H = np.asarray(X, dtype=np.float64)
    if H.ndim != 2:
        raise ShapeError(f"forward expects a 2-D batch, got shape {H.shape}")
    for i, layer in enumerate(layers):
        if H.shape[-1] != layer.in_dim:
            raise ShapeError(f"layer {i} expects {layer.in_dim} inputs but received {H.shape[-1]}")
        H = _NP_ACT[layer.activation](H @ layer.weights.data.T + layer.bias.data)
    return H


def init_layers(widths, rng: np.random.Generator, hidden_activation: str = "tanh",
                output_activation: str = "identity", name: str = "net") -> list[DenseLayer]:
    """Build a stack of DenseLayers for the given width sequence.

    Weights are U(-s, s) with s = sqrt(6 / (fan_in + fan_out)); biases start
    at zero. `widths` runs [d_in, hidden..., d_out].
    """
    if len(widths) < 2:
        raise ConfigError(f"need at least input and output widths, got {list(widths)}")
    if any(w <= 0 for w in widths):
        raise ConfigError(f"layer widths must be positive, got {list(widths)}")
    layers = []
    last = len(widths) - 2
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        w = Tensor(rng.uniform(-s, s, size=(fan_out, fan_in)), requires_grad=True,
                   name=f"{name}.{i}.weights")
        b = Tensor(np.zeros(fan_out), requires_grad=True, name=f"{name}.{i}.bias")
        act = output_activation if i == last else hidden_activation
        layers.append(DenseLayer(w, b, act))
    return layers
