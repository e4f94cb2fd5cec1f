"""Cycle-consistent conditional-invariance bottleneck models.

Learns a partitioned latent representation of lifted level-set data: a
property subspace that predicts the target and an invariant subspace whose
traversal leaves the predicted property fixed.
"""

__version__ = "0.1.0"

from .data import Dataset, LevelSetSpec, LiftMaps, generate, load_dataset, save_dataset, unlift
from .errors import ConfigError, CycleVibError, NumericError, ShapeError, TapeError
from .estimator import CycleVib
from .evaluation import (
    EvalReport,
    TraversalSpec,
    evaluate,
    invariance_mae,
    reconstruction_maes,
    sparsity_report,
    traverse,
)
from .model import CycleVibModel, ModelConfig, load_checkpoint, save_checkpoint
from .objectives import LossReport, LossWeights
from .trainer import TrainConfig, TrainState, fit, run_sweep

__all__ = [
    "CycleVib", "CycleVibModel", "ModelConfig", "TrainConfig", "TrainState",
    "LossWeights", "LossReport", "EvalReport", "TraversalSpec",
    "Dataset", "LevelSetSpec", "LiftMaps",
    "generate", "load_dataset", "save_dataset", "unlift",
    "fit", "run_sweep", "evaluate", "invariance_mae", "reconstruction_maes",
    "sparsity_report", "traverse", "save_checkpoint", "load_checkpoint",
    "CycleVibError", "ShapeError", "NumericError", "TapeError", "ConfigError",
    "__version__",
]
