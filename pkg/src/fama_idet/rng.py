"""Counter-based random streams for reproducible, batch-independent simulation.

Every trial owns a fixed slice of a Philox4x64 stream: the key is derived
from ``(seed, kind, ue)`` and trial ``t`` starts at counter ``t * blocks``
where ``blocks`` is the number of 4-word Philox blocks one trial consumes.
Any batch of trials can therefore be generated on its own and concatenated
to exactly the same numbers as a single serial run.

Normals come from the Box-Muller transform of 53-bit uniforms in (0, 1], so
each trial consumes a fixed number of raw words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Stream families; separate keys keep FAMA and baseline draws independent.
KIND_FAMA = 0
KIND_MIMO = 1

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Substream:
    """Address of one trial's random numbers."""

    seed: int
    trial: int
    ue: int = 0
    kind: int = KIND_FAMA


def stream_key(seed: int, ue: int = 0, kind: int = KIND_FAMA) -> np.ndarray:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(kind, ue))
    return ss.generate_state(2, np.uint64)


def standard_normals(seed: int, ue: int, start: int, count: int, per_trial: int,
                     kind: int = KIND_FAMA) -> np.ndarray:
    """Standard normals for trials ``start .. start + count - 1``.

    Returns an array of shape ``(count, per_trial)``; row ``j`` depends only
    on ``(seed, kind, ue, start + j)``.
    """
    words = per_trial + (per_trial % 2)
    blocks = -(-words // 4)
    gen = np.random.Philox(key=stream_key(seed, ue, kind), counter=start * blocks)
    raw = gen.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :words]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    angle = _TWO_PI * u[:, 1::2]
    out = np.empty((count, words))
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out[:, :per_trial]
