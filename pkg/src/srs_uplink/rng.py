"""Counter-based uniforms keyed by ``(seed, trial_index, draw_index)``.

Each uniform comes from a SplitMix64 hash of its three keys. Nothing is
carried from one draw to the next, so any subset of trials can be generated
in any order or on any worker with bit-identical values.  The scalar and
numpy paths share the constants and agree exactly.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_DRAW_STEP = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_UNIT = 2.0**-53


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _seed_key(seed: int) -> int:
    return _mix(seed + _GOLDEN)


def _trial_key(seed_key: int, trial: int) -> int:
    return _mix(seed_key ^ ((trial * _GOLDEN) & _MASK))


class TrialStream:
    """Uniform draws on [0, 1) for one trial; ``uniform(i)`` is a pure function of ``i``."""

    __slots__ = ("seed", "trial", "_key")

    def __init__(self, seed: int, trial: int) -> None:
        self.seed = seed
        self.trial = trial
        self._key = _trial_key(_seed_key(seed), trial)

    def uniform(self, draw: int) -> float:
        z = _mix((self._key + (draw + 1) * _DRAW_STEP) & _MASK)
        return (z >> 11) * _TO_UNIT


def trial_keys(seed: int, trials: np.ndarray) -> np.ndarray:
    """Per-trial keys for an array of trial indices (uint64)."""
    t = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix_np(np.uint64(_seed_key(seed)) ^ (t * np.uint64(_GOLDEN)))


def uniforms(keys: np.ndarray, draws: np.ndarray | range) -> np.ndarray:
    """Uniform matrix of shape ``(len(keys), len(draws))``."""
    d = (np.asarray(draws, dtype=np.uint64) + np.uint64(1)) * np.uint64(_DRAW_STEP)
    with np.errstate(over="ignore"):
        z = _mix_np(keys[:, None] + d[None, :])
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT
