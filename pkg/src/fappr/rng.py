"""Counter-based uniform streams keyed by (seed, source, walk, age, slot).

Every random number a walk consumes is a pure function of its key, so the
outcome of a run does not depend on how walks are partitioned across workers
or in which order they are processed.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_SLOT_BITS = np.uint64(8)
_MASK64 = (1 << 64) - 1

# slot layout inside one (walk, age) key
SLOT_PICK = 0
SLOT_SWITCH = 1
SLOT_COIN = 255


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; ``z`` must be a uint64 array."""
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_keys(seed: int, source: np.ndarray, walk: np.ndarray, age: np.ndarray) -> np.ndarray:
    """Per-walk 64-bit keys for one round; combine with a slot via :func:`uniforms`."""
    h = _mix(np.full(np.shape(source), seed & _MASK64, dtype=np.uint64))
    h = _mix(h ^ np.asarray(source, dtype=np.uint64))
    h = _mix(h ^ np.asarray(walk, dtype=np.uint64))
    return h ^ (np.asarray(age, dtype=np.uint64) << _SLOT_BITS)


def uniforms(keys: np.ndarray, slot: int) -> np.ndarray:
    """Doubles in ``[0, 1)`` derived from ``keys`` and a slot number < 256."""
    bits = _mix(keys ^ np.uint64(slot))
    return (bits >> _S11).astype(np.float64) * (1.0 / (1 << 53))


class CounterRandom:
    """Scalar adaptor exposing ``random()`` over a single counter-based stream.

    Lets the scalar samplers (``sample_alias`` etc.) draw from the same keyed
    streams as the vectorized engine.
    """

    def __init__(self, seed: int, *key: int):
        parts = [seed, *key]
        h = np.zeros(1, dtype=np.uint64)
        for part in parts:
            h = _mix(h ^ np.uint64(part & _MASK64))
        self._key = h
        self._counter = 0

    def random(self) -> float:
        u = uniforms(self._key ^ (np.uint64(self._counter >> 8) << _SLOT_BITS), self._counter & 0xFF)
        self._counter += 1
        return float(u[0])
