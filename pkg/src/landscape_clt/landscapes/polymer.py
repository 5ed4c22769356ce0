from __future__ import annotations

import itertools
import math

import numpy as np

from ..disorder import ConfigurationError
from ..walk import WalkTable, return_probabilities
from .base import OverlapSumModel


class DirectedPolymer(OverlapSumModel):
    """Nearest-neighbour paths of length ``n`` in Z^d started at the origin.

    A configuration is a step sequence with codes ``0..2d-1``: code ``c``
    moves along axis ``c // 2`` in direction ``+1`` (even) or ``-1`` (odd).
    The weight ``xi_k(x)`` sits at time ``k >= 1`` and site ``x``.
    """

    kind = "polymer"

    def __init__(self, n: int, d: int = 1):
        if d < 1:
            raise ConfigurationError("polymer needs d >= 1")
        if n < 1:
            raise ConfigurationError("polymer needs n >= 1")
        super().__init__(n)
        self.d = int(d)

    def describe(self):
        return f"polymer(n={self.n}, d={self.d})"

    @property
    def n_terms(self):
        return self.n

    def base_size(self):
        return (2 * self.d) ** self.n

    def scaling_cn(self):
        n, d = self.n, self.d
        if d == 1:
            return (math.pi * n / 4) ** 0.25
        if d == 2:
            if n < 2:
                raise ConfigurationError("d=2 scaling needs n >= 2")
            return math.sqrt(math.pi * n / math.log(n))
        return math.sqrt(n)

    def return_sum(self, walk: WalkTable | None = None) -> float:
        if walk is not None:
            if walk.d != self.d or walk.horizon < 2 * self.n:
                raise ValueError("walk table does not cover this polymer")
            probs = walk.return_probs
        else:
            probs = return_probabilities(self.d, 2 * self.n)
        return float(np.sum(probs[2:2 * self.n + 1:2]))

    def log_s_n_squared(self, walk: WalkTable | None = None) -> float:
        return 2 * self.n * math.log(2 * self.d) - math.log(self.n) + math.log(self.return_sum(walk))

    def s_n_squared(self, walk: WalkTable | None = None) -> float:
        return math.exp(self.log_s_n_squared(walk))

    def steps_to_sites(self, configs) -> np.ndarray:
        """Sites ``omega(1..n)``, shape (count, n, d)."""
        configs = np.asarray(configs, dtype=np.int64)
        axis = configs // 2
        sign = 1 - 2 * (configs % 2)
        moves = np.zeros(configs.shape + (self.d,), dtype=np.int64)
        np.put_along_axis(moves, axis[..., None], sign[..., None], axis=-1)
        return np.cumsum(moves, axis=-2)

    def site_key(self, k, sites):
        base = 2 * self.n + 1
        k = np.asarray(k, dtype=np.int64)
        sites = np.asarray(sites, dtype=np.int64)
        key = k
        for i in range(self.d):
            key = key * base + (sites[..., i] + self.n)
        return key

    def element_keys(self, configs):
        sites = self.steps_to_sites(configs)
        k = np.arange(1, self.n + 1)
        return self.site_key(np.broadcast_to(k, sites.shape[:-1]), sites)

    def _all_configs(self):
        return np.array(list(itertools.product(range(2 * self.d), repeat=self.n)), dtype=np.int64)

    def sample_configs(self, stream, count):
        return stream.generator().integers(0, 2 * self.d, size=(count, self.n))

    def validate(self, config):
        c = np.asarray(config)
        return c.shape == (self.n,) and bool(np.all((c >= 0) & (c < 2 * self.d)))

    def overlap(self, c1, c2):
        s1 = self.steps_to_sites(np.asarray(c1)[None])[0]
        s2 = self.steps_to_sites(np.asarray(c2)[None])[0]
        return int(np.sum(np.all(s1 == s2, axis=-1)))

    def format_config(self, config):
        return f"polymer {self.n} {self.d} " + " ".join(str(int(v)) for v in np.asarray(config))

    def parse_config(self, line):
        parts = line.split()
        if len(parts) < 3 or parts[0] != "polymer" or int(parts[1]) != self.n or int(parts[2]) != self.d:
            raise ValueError(f"line does not describe a {self.describe()} configuration: {line!r}")
        return np.array([int(v) for v in parts[3:]], dtype=np.int64)
