"""Counter-based random streams.

Two flavours of randomness are provided by :class:`RngStream`:

* a bulk generator (numpy ``Philox`` keyed by ``(seed, stream_id)``) for
  ordinary Monte Carlo draws, and
* a keyed hash ``uniform(keys)`` that maps integer element keys to uniforms
  in (0, 1).  The output depends only on ``(seed, stream_id, key)``, so a
  disorder field can be materialized lazily and in any order.

The hash is the splitmix64 finalizer applied to ``key_material + key * GAMMA``.
The same mixer is compiled in :mod:`landscape_clt._kernels` so that jitted
samplers agree with the numpy path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

_GAMMA_U = np.uint64(GAMMA)
_MIX1_U = np.uint64(MIX1)
_MIX2_U = np.uint64(MIX2)
_INV53 = 2.0 ** -53


def mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int (wrapping at 64 bits)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * MIX1) & MASK64
    x = ((x ^ (x >> 27)) * MIX2) & MASK64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    x = (x ^ (x >> np.uint64(30))) * _MIX1_U
    x = (x ^ (x >> np.uint64(27))) * _MIX2_U
    return x ^ (x >> np.uint64(31))


def tag_id(tag) -> int:
    """Stable 64-bit id for a stream tag (int or str)."""
    if isinstance(tag, (int, np.integer)):
        return int(tag) & MASK64
    h = 0
    for b in str(tag).encode():
        h = mix64(h * 31 + b + GAMMA)
    return h


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id, counter)``."""

    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id", "counter"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {type(v).__name__}")
            object.__setattr__(self, name, int(v) & MASK64)

    @property
    def key_material(self) -> int:
        """64-bit state word mixing seed and stream id."""
        return mix64(mix64(self.seed ^ GAMMA) ^ mix64(self.stream_id + MIX2))

    def child(self, tag) -> "RngStream":
        """Independent sub-stream derived from this one and ``tag``."""
        return RngStream(self.seed, mix64(self.key_material ^ mix64(tag_id(tag) + MIX1)), 0)

    def advance(self, steps: int) -> "RngStream":
        return replace(self, counter=self.counter + steps)

    def generator(self) -> np.random.Generator:
        counter = np.array([self.counter, 0, 0, 0], dtype=np.uint64)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def bits(self, keys) -> np.ndarray:
        """Keyed 64-bit hash values for an array of non-negative integer keys."""
        k = np.asarray(keys, dtype=np.uint64)
        return mix64_array(np.uint64(self.key_material) + k * _GAMMA_U)

    def uniform(self, keys) -> np.ndarray:
        """Keyed uniforms on the open interval (0, 1)."""
        b = self.bits(keys) >> np.uint64(11)
        return (b.astype(np.float64) + 0.5) * _INV53


def open_uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on (0, 1) with 53-bit resolution; never returns 0 or 1."""
    b = gen.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (b.astype(np.float64) + 0.5) * _INV53
