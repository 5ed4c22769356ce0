from __future__ import annotations

import numpy as np

from ..disorder import DisorderSpec
from ..rng import RngStream


class DisorderField:
    """Weights attached to integer element keys.

    ``values(keys)`` is a pure function of ``(stream, key)``: querying the
    same key twice, or in a different order, returns the same number.  A
    ``constant`` overrides every weight (used for degenerate checks).
    """

    def __init__(self, spec: DisorderSpec, stream: RngStream, constant: float | None = None):
        self.spec = spec
        self.stream = stream
        self.constant = constant

    def values(self, keys) -> np.ndarray:
        keys = np.asarray(keys)
        if self.constant is not None:
            return np.full(keys.shape, float(self.constant))
        return self.spec.from_uniform(self.stream.uniform(keys))

    def value(self, key: int) -> float:
        return float(self.values(np.array([key]))[0])

    def dense(self, size: int) -> np.ndarray:
        """Weights for keys ``0..size-1``."""
        return self.values(np.arange(size, dtype=np.uint64))
