"""Seeded random streams.

One 64-bit seed fans out into independent substreams so that each consumer
(parameter init, reparameterization noise, latent sampling, ...) is
reproducible on its own regardless of what the others draw.
"""

from __future__ import annotations

import numpy as np

STREAM_PARAM_INIT = 0
STREAM_REPARAM_NOISE = 1
STREAM_LATENT_SAMPLING = 2
STREAM_DATA_POINTS = 3
STREAM_DATA_NOISE = 4
STREAM_LIFT = 5
STREAM_SPLIT = 6
STREAM_SHUFFLE = 7
STREAM_EVAL = 8


def substream(seed: int, stream: int, *key: int) -> np.random.Generator:
    """An independent generator for (seed, stream, extra key words)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                                        spawn_key=(int(stream), *map(int, key))))
