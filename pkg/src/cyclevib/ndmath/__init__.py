"""Minimal dense-tensor math: reverse-mode autodiff, dense layers, Adam."""

from .nets import ACTIVATIONS, DenseLayer, forward, forward_np, init_layers
from .optim import OptimizerState, init_optimizer, optimizer_step
from .rng import (
    STREAM_DATA_NOISE,
    STREAM_DATA_POINTS,
    STREAM_EVAL,
    STREAM_LATENT_SAMPLING,
    STREAM_LIFT,
    STREAM_PARAM_INIT,
    STREAM_REPARAM_NOISE,
    STREAM_SHUFFLE,
    STREAM_SPLIT,
    substream,
)
from .tensor import (
    Tensor,
    absval,
    add,
    concat,
    exp,
    log,
    matmul,
    mul,
    norm,
    relu,
    softplus,
    sqrt,
    square,
    sub,
    take,
    tanh,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "Tensor", "DenseLayer", "OptimizerState",
    "forward", "forward_np", "init_layers", "init_optimizer", "optimizer_step",
    "substream", "ACTIVATIONS",
    "add", "sub", "mul", "matmul", "transpose", "tanh", "relu", "softplus",
    "exp", "log", "square", "sqrt", "absval", "tsum", "tmean", "norm",
    "concat", "take",
    "STREAM_PARAM_INIT", "STREAM_REPARAM_NOISE", "STREAM_LATENT_SAMPLING",
    "STREAM_DATA_POINTS", "STREAM_DATA_NOISE", "STREAM_LIFT", "STREAM_SPLIT",
    "STREAM_SHUFFLE", "STREAM_EVAL",
]
