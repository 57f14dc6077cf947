"""Counter-based splitmix64 streams keyed by (seed, multi-index).

Every random number drawn by the field generators is a pure function of the
user seed, the tile multi-index and the draw number, so a field can be
regenerated at any resolution without replaying a sequential generator.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finaliser, applied elementwise to a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, index: np.ndarray) -> np.ndarray:
    """Per-row stream keys for an integer multi-index array of shape (m, d)."""
    index = np.atleast_2d(np.asarray(index, dtype=np.int64))
    key = np.full(index.shape[0], np.uint64(int(seed) & _MASK64), dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = mix64(key + _GAMMA)
        for axis in range(index.shape[1]):
            offset = (index[:, axis] + 1).astype(np.uint64) * _GAMMA
            key = mix64(key ^ offset)
    return key


def uniforms(keys: np.ndarray, count: int) -> np.ndarray:
    """Draw ``count`` doubles in [0, 1) from each key; shape (m, count)."""
    keys = np.asarray(keys, dtype=np.uint64)
    draws = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        raw = mix64(keys[:, None] + draws[None, :] * _GAMMA)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def normals(keys: np.ndarray, count: int) -> np.ndarray:
    """Standard normal draws by Box-Muller; shape (m, count)."""
    pairs = (count + 1) // 2
    u = uniforms(keys, 2 * pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
    angle = 2.0 * np.pi * u[:, 1::2]
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    return z[:, :count]
